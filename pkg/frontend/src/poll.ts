// Polling cadence: 2 s base interval with exponential backoff on failures,
// capped; the interval resets on the first successful poll.

export const BASE_POLL_MS = 2000;
export const MAX_POLL_MS = 16000;

export function nextDelay(consecutiveFailures: number, baseMs = BASE_POLL_MS): number {
  if (consecutiveFailures <= 0) return baseMs;
  return Math.min(MAX_POLL_MS, baseMs * 2 ** consecutiveFailures);
}

export interface PollerHooks<T> {
  fetchOnce: () => Promise<T>;
  onResult: (value: T) => void;
  onError?: (error: unknown) => void;
  /** return true to stop polling */
  isDone: (value: T) => boolean;
}

export class Poller<T> {
  private failures = 0;
  private stopped = false;
  private timer: ReturnType<typeof setTimeout> | undefined;

  constructor(
    private readonly hooks: PollerHooks<T>,
    private readonly baseMs = BASE_POLL_MS,
  ) {}

  start(): void {
    this.stopped = false;
    void this.tick();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== undefined) clearTimeout(this.timer);
  }

  private async tick(): Promise<void> {
    if (this.stopped) return;
    try {
      const value = await this.hooks.fetchOnce();
      this.failures = 0;
      this.hooks.onResult(value);
      if (this.hooks.isDone(value)) {
        this.stopped = true;
        return;
      }
    } catch (error) {
      this.failures += 1;
      this.hooks.onError?.(error);
    }
    if (!this.stopped) {
      this.timer = setTimeout(() => void this.tick(), nextDelay(this.failures, this.baseMs));
    }
  }
}
