/** Fixed-interval polling loop; pauses while the tab is hidden. */

export class Poller {
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly tick: () => Promise<void> | void,
    private readonly intervalSeconds: number,
  ) {}

  start(): void {
    if (this.timer !== null) return;
    void this.tick();
    this.timer = setInterval(() => {
      if (typeof document !== "undefined" && document.hidden) return;
      void this.tick();
    }, this.intervalSeconds * 1000);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
