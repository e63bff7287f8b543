// Polling with linear backoff; the server is the single source of truth,
// so the loop simply re-asks until the predicate is satisfied.

export interface PollOptions {
  intervalMs?: number;
  backoffFactor?: number;
  maxIntervalMs?: number;
  timeoutMs?: number;
}

export function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export async function pollUntil<T>(
  fn: () => Promise<T>,
  done: (value: T) => boolean,
  opts: PollOptions = {},
): Promise<T> {
  const start = Date.now();
  let interval = opts.intervalMs ?? 1000;
  const factor = opts.backoffFactor ?? 1.5;
  const maxInterval = opts.maxIntervalMs ?? 8000;
  const timeout = opts.timeoutMs ?? 10 * 60 * 1000;
  for (;;) {
    const value = await fn();
    if (done(value)) {
      return value;
    }
    if (Date.now() - start > timeout) {
      throw new Error("polling timed out");
    }
    await sleep(interval);
    interval = Math.min(interval * factor, maxInterval);
  }
}
