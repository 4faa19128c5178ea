import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { Poller } from "../src/poll";

describe("Poller", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("ticks once per interval", async () => {
    let ticks = 0;
    const poller = new Poller(async () => {
      ticks += 1;
    }, 1000);
    poller.start();
    await vi.advanceTimersByTimeAsync(3000);
    poller.stop();
    expect(ticks).toBe(3);
  });

  it("skips intervals that fire while a tick is in flight", async () => {
    let active = 0;
    let maxActive = 0;
    let ticks = 0;
    const poller = new Poller(async () => {
      ticks += 1;
      active += 1;
      maxActive = Math.max(maxActive, active);
      await new Promise((resolve) => setTimeout(resolve, 2500));
      active -= 1;
    }, 1000);
    poller.start();
    await vi.advanceTimersByTimeAsync(6000);
    poller.stop();
    expect(maxActive).toBe(1);
    expect(ticks).toBeLessThanOrEqual(2);
  });

  it("keeps polling after a failed tick", async () => {
    let ticks = 0;
    const poller = new Poller(async () => {
      ticks += 1;
      if (ticks === 1) {
        throw new Error("boom");
      }
    }, 1000);
    poller.start();
    await vi.advanceTimersByTimeAsync(1000);
    expect(poller.lastError).toBeInstanceOf(Error);
    await vi.advanceTimersByTimeAsync(1000);
    poller.stop();
    expect(ticks).toBe(2);
    expect(poller.lastError).toBeNull();
  });

  it("stops cleanly and will not double-start", async () => {
    let ticks = 0;
    const poller = new Poller(async () => {
      ticks += 1;
    }, 1000);
    poller.start();
    poller.start(); // second start is a no-op
    expect(poller.active).toBe(true);
    await vi.advanceTimersByTimeAsync(1000);
    poller.stop();
    expect(poller.active).toBe(false);
    await vi.advanceTimersByTimeAsync(5000);
    expect(ticks).toBe(1);
  });
});
