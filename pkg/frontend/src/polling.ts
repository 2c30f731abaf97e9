// Progress polling for simulation runs. Polling (not push) matches the
// backend's design; observations feed a monotone progress bar.

import type { ApiClient } from "./api.js";
import type { ProgressResponse } from "./types.js";

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export interface PollOutcome {
  final: ProgressResponse;
  observations: number[];
}

/**
 * Poll a run until it finishes. Calls `onSample` for every observation and
 * returns the full observation trace (non-decreasing by the server contract).
 */
export async function pollProgress(
  api: ApiClient,
  name: string,
  intervalMs = 500,
  onSample?: (sample: ProgressResponse) => void,
): Promise<PollOutcome> {
  const observations: number[] = [];
  for (;;) {
    const sample = await api.getProgress(name);
    observations.push(sample.progress);
    onSample?.(sample);
    if (sample.status !== "Running") {
      return { final: sample, observations };
    }
    await sleep(intervalMs);
  }
}

/** True when a polled progress trace never decreases. */
export function isMonotone(observations: number[]): boolean {
  for (let i = 1; i < observations.length; i++) {
    if (observations[i]! < observations[i - 1]!) {
      return false;
    }
  }
  return true;
}
