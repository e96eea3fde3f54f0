// Timer-driven polling for live transcript views. The tick callback does
// the fetch-and-render; returning false (session left the "open" state)
// stops the loop. Ticks never overlap: the next one is scheduled only
// after the previous promise settles.

export interface Poller {
  stop(): void;
  readonly running: boolean;
}

export interface PollOptions {
  intervalMs?: number;
  onError?: (err: unknown) => void;
}

export function startPolling(tick: () => Promise<boolean>, options: PollOptions = {}): Poller {
  const intervalMs = options.intervalMs ?? 1000;
  let active = true;
  let timer: ReturnType<typeof setTimeout> | null = null;

  const step = async () => {
    timer = null;
    let keepGoing = true;
    try {
      keepGoing = await tick();
    } catch (err) {
      if (options.onError) {
        options.onError(err);
      }
    }
    if (!active || !keepGoing) {
      active = false;
      return;
    }
    timer = setTimeout(step, intervalMs);
  };

  void step();

  return {
    stop() {
      active = false;
      if (timer !== null) {
        clearTimeout(timer);
        timer = null;
      }
    },
    get running() {
      return active;
    },
  };
}
