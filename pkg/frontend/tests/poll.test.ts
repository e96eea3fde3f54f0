import { afterEach, beforeEach, describe, expect, test, vi } from "vitest";

import { startPolling } from "../src/poll.js";

describe("startPolling", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  test("ticks immediately, then on the interval, until the tick says stop", async () => {
    let count = 0;
    const poller = startPolling(
      async () => {
        count += 1;
        return count < 3;
      },
      { intervalMs: 1000 },
    );

    await vi.advanceTimersByTimeAsync(0);
    expect(count).toBe(1);

    await vi.advanceTimersByTimeAsync(1000);
    expect(count).toBe(2);

    await vi.advanceTimersByTimeAsync(1000);
    expect(count).toBe(3);
    expect(poller.running).toBe(false);

    await vi.advanceTimersByTimeAsync(5000);
    expect(count).toBe(3);
  });

  test("stop() halts the loop", async () => {
    let count = 0;
    const poller = startPolling(
      async () => {
        count += 1;
        return true;
      },
      { intervalMs: 1000 },
    );
    await vi.advanceTimersByTimeAsync(0);
    expect(count).toBe(1);

    poller.stop();
    expect(poller.running).toBe(false);
    await vi.advanceTimersByTimeAsync(10_000);
    expect(count).toBe(1);
  });

  test("a slow tick never overlaps the next one", async () => {
    const t0 = Date.now();
    const starts: number[] = [];
    startPolling(
      async () => {
        starts.push(Date.now() - t0);
        await new Promise((resolve) => setTimeout(resolve, 2500));
        return starts.length < 2;
      },
      { intervalMs: 1000 },
    );

    await vi.advanceTimersByTimeAsync(0);
    expect(starts).toHaveLength(1);

    // tick one is still in flight at t=1000; nothing new starts
    await vi.advanceTimersByTimeAsync(1000);
    expect(starts).toHaveLength(1);

    // it settles at t=2500 and the next tick lands at t=3500
    await vi.advanceTimersByTimeAsync(2500);
    expect(starts).toHaveLength(2);
    expect(starts[1]).toBe(3500);
  });

  test("a throwing tick reports the error and keeps polling", async () => {
    const errors: unknown[] = [];
    let count = 0;
    const poller = startPolling(
      async () => {
        count += 1;
        if (count === 1) {
          throw new Error("transient");
        }
        return false;
      },
      { intervalMs: 1000, onError: (err) => errors.push(err) },
    );

    await vi.advanceTimersByTimeAsync(0);
    expect(errors).toHaveLength(1);
    expect(poller.running).toBe(true);

    await vi.advanceTimersByTimeAsync(1000);
    expect(count).toBe(2);
    expect(poller.running).toBe(false);
  });

  test("default interval is one second", async () => {
    const starts: number[] = [];
    startPolling(async () => {
      starts.push(Date.now());
      return starts.length < 2;
    });
    await vi.advanceTimersByTimeAsync(0);
    await vi.advanceTimersByTimeAsync(999);
    expect(starts).toHaveLength(1);
    await vi.advanceTimersByTimeAsync(1);
    expect(starts).toHaveLength(2);
  });
});
