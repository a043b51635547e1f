import type { WhatifResult } from './api.js';

export type WhatifFetcher = (m: number, signal: AbortSignal) => Promise<WhatifResult>;

export const DEBOUNCE_MS = 250;

/**
 * Drives the what-if panel from slider movement. Each move cancels whatever
 * is pending or in flight; a request only fires once the slider has rested
 * for DEBOUNCE_MS, and every response is cached by minute so revisiting a
 * position never refetches.
 */
export class WhatifController {
  private cache = new Map<number, WhatifResult>();
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inflight: AbortController | null = null;
  private lastRequested: number | null = null;

  constructor(
    private fetcher: WhatifFetcher,
    private onResult: (result: WhatifResult) => void,
    private onError: (error: unknown) => void,
    private debounceMs: number = DEBOUNCE_MS,
  ) {}

  /** Slider moved to minute m. */
  request(m: number): void {
    this.lastRequested = m;
    this.cancelPending();
    const hit = this.cache.get(m);
    if (hit !== undefined) {
      this.onResult(hit);
      return;
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      this.fire(m);
    }, this.debounceMs);
  }

  private fire(m: number): void {
    const controller = new AbortController();
    this.inflight = controller;
    this.fetcher(m, controller.signal).then(
      (result) => {
        if (this.inflight === controller) this.inflight = null;
        this.cache.set(m, result);
        if (this.lastRequested === m) this.onResult(result);
      },
      (error) => {
        if (this.inflight === controller) this.inflight = null;
        if (controller.signal.aborted) return; // superseded, not a failure
        this.onError(error);
      },
    );
  }

  private cancelPending(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    if (this.inflight !== null) {
      this.inflight.abort();
      this.inflight = null;
    }
  }

  cached(m: number): WhatifResult | undefined {
    return this.cache.get(m);
  }

  /** Drop every cached answer, e.g. after a re-fit or re-simulate. */
  invalidate(): void {
    this.cancelPending();
    this.cache.clear();
    this.lastRequested = null;
  }
}

export function formatDifference(result: WhatifResult): string {
  const sign = result.difference >= 0 ? '+' : '';
  return `${sign}${result.difference.toFixed(1)} completed experiences`;
}
