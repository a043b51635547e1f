import { describe, expect, it } from 'vitest';

import type { ForecastCurve } from '../src/api.js';
import {
  DECIMATION_THRESHOLD,
  computeLayout,
  decimate,
  markerPositions,
  tooltipText,
} from '../src/chart.js';
import type { Series } from '../src/chart.js';
import { fixture } from './helpers.js';

function fixtureSeries(): Series[] {
  const baseline = fixture<ForecastCurve>('crossing', 'forecast_baseline');
  const wiredoff = fixture<ForecastCurve>('crossing', 'forecast_wiredoff');
  return [
    { label: 'baseline', offsets: baseline.offsets, values: baseline.values, color: '#888' },
    { label: 'W_off', offsets: wiredoff.offsets, values: wiredoff.values, color: '#e4572e' },
  ];
}

describe('computeLayout', () => {
  const layout = computeLayout(fixtureSeries(), 860, 380);

  it('maps minutes monotonically onto pixels', () => {
    let prev = -Infinity;
    for (let m = layout.mMin; m <= layout.mMax; m++) {
      const x = layout.xFor(m);
      expect(x).toBeGreaterThan(prev);
      prev = x;
    }
  });

  it('inverts pixel to minute at minute resolution', () => {
    for (let m = layout.mMin; m <= layout.mMax; m++) {
      expect(layout.minuteAt(layout.xFor(m))).toBe(m);
    }
  });

  it('pads the value range so curves do not touch the frame', () => {
    const values = fixtureSeries().flatMap((s) => s.values);
    expect(layout.yMin).toBeLessThan(Math.min(...values));
    expect(layout.yMax).toBeGreaterThan(Math.max(...values));
  });

  it('holds up on a single flat series', () => {
    const layout2 = computeLayout(
      [{ label: 'flat', offsets: [1, 2, 3], values: [5, 5, 5], color: '#fff' }],
      400,
      200,
    );
    expect(layout2.yMax).toBeGreaterThan(layout2.yMin);
    expect(Number.isFinite(layout2.yFor(5))).toBe(true);
  });
});

describe('decimate', () => {
  it('passes short series through untouched', () => {
    const offsets = [1, 2, 3];
    const values = [4, 5, 6];
    const out = decimate(offsets, values);
    expect(out.offsets).toBe(offsets); // same arrays, no copy
    expect(out.values).toBe(values);
  });

  it('keeps every bucket extreme on long series', () => {
    // deterministic LCG so the spike positions never move
    let x = 123456789;
    const next = () => {
      x = (1103515245 * x + 12345) % 2147483648;
      return x / 2147483648;
    };
    const n = 25_000;
    const offsets = Array.from({ length: n }, (_, i) => i);
    const values = Array.from({ length: n }, () => next() * 100);
    values[17_123] = 1e6; // spike must survive
    values[4_001] = -1e6;

    const out = decimate(offsets, values, DECIMATION_THRESHOLD);
    expect(out.offsets.length).toBeLessThanOrEqual(DECIMATION_THRESHOLD);
    expect(Math.max(...out.values)).toBe(1e6);
    expect(Math.min(...out.values)).toBe(-1e6);
    for (let i = 1; i < out.offsets.length; i++) {
      expect(out.offsets[i]!).toBeGreaterThan(out.offsets[i - 1]!);
    }
  });
});

describe('markers and tooltips', () => {
  const series = fixtureSeries();
  const layout = computeLayout(series, 860, 380);

  it('slider and m* markers use the same scale', () => {
    const markers = markerPositions(layout, 8, 8);
    expect(markers.slider).toBe(markers.mStar!);
    expect(markers.t0).toBe(layout.xFor(0));
  });

  it('omits the marker when there is nothing to mark', () => {
    expect(markerPositions(layout, null, 3).mStar).toBeNull();
  });

  it('tooltip lists every series that covers the minute', () => {
    const text = tooltipText(series, 8);
    expect(text).toContain('m=8');
    expect(text).toContain('baseline');
    expect(text).toContain('W_off');
    expect(tooltipText(series, 9999)).toBe('m=9999'); // out of range: just the minute
  });
});
