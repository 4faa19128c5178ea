/** Fixed-interval background poller with an overlap guard: an interval
    that fires while the previous tick is still in flight is skipped, and
    a failing tick is recorded but never stops the loop. */
export class Poller {
  private timer: ReturnType<typeof setInterval> | null = null;
  private running = false;
  lastError: unknown = null;

  constructor(
    private readonly tick: () => Promise<void>,
    private readonly intervalMs: number = 2000,
  ) {}

  start(): void {
    if (this.timer !== null) {
      return;
    }
    this.timer = setInterval(() => {
      void this.runOnce();
    }, this.intervalMs);
  }

  async runOnce(): Promise<void> {
    if (this.running) {
      return;
    }
    this.running = true;
    try {
      await this.tick();
      this.lastError = null;
    } catch (err) {
      this.lastError = err;
    } finally {
      this.running = false;
    }
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  get active(): boolean {
    return this.timer !== null;
  }
}
