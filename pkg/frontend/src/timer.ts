/**
 * Accumulates oracle-active wall time for the current round.
 *
 * The UI pauses it while a background job runs, so recompute time never
 * counts as annotation time. Injected clock keeps it testable.
 */
export class ToaTimer {
  private accumulatedMs = 0;
  private runningSince: number | null = null;

  constructor(private readonly now: () => number = () => Date.now()) {}

  get running(): boolean {
    return this.runningSince !== null;
  }

  start(): void {
    if (this.runningSince === null) {
      this.runningSince = this.now();
    }
  }

  pause(): void {
    if (this.runningSince !== null) {
      this.accumulatedMs += this.now() - this.runningSince;
      this.runningSince = null;
    }
  }

  elapsedSeconds(): number {
    const live = this.runningSince === null ? 0 : this.now() - this.runningSince;
    return (this.accumulatedMs + live) / 1000;
  }

  /** Take the accumulated seconds (to post with a round advance) and restart. */
  drain(): number {
    this.pause();
    const seconds = this.accumulatedMs / 1000;
    this.accumulatedMs = 0;
    return seconds;
  }
}
