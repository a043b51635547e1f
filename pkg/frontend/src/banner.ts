import type { Recommendation } from './api.js';

export interface BannerView {
  tone: 'act' | 'hold';
  headline: string;
  detail: string;
  /** inline SVG for the margin sparkline */
  sparkline: string;
}

/** Minute offsets are anchored to an epoch minute; render as ISO to the minute. */
export function wireoffTimestamp(anchorEpochMinute: number, m: number): string {
  const date = new Date((anchorEpochMinute + m) * 60_000);
  return date.toISOString().slice(0, 16) + 'Z';
}

function round2(x: number): string {
  return (Math.round(x * 100) / 100).toFixed(2);
}

/**
 * Polyline over the margin curve with a dashed zero line, sized for the
 * banner corner. Coordinates are fixed to 2 decimals so the output is
 * stable across platforms.
 */
export function sparklinePath(margin: number[], width = 140, height = 32): string {
  if (margin.length === 0) return '';
  let lo = Math.min(0, ...margin);
  let hi = Math.max(0, ...margin);
  if (hi === lo) hi = lo + 1;
  const xFor = (i: number) =>
    margin.length === 1 ? width / 2 : (i / (margin.length - 1)) * width;
  const yFor = (v: number) => height - ((v - lo) / (hi - lo)) * height;
  const line = margin
    .map((v, i) => `${i === 0 ? 'M' : 'L'}${round2(xFor(i))},${round2(yFor(v))}`)
    .join('');
  const zeroY = round2(yFor(0));
  return (
    `<svg class="sparkline" viewBox="0 0 ${width} ${height}" width="${width}" height="${height}" role="img">` +
    `<line x1="0" y1="${zeroY}" x2="${width}" y2="${zeroY}" class="spark-zero" stroke-dasharray="3 3"/>` +
    `<path d="${line}" class="spark-line" fill="none"/>` +
    `</svg>`
  );
}

export function bannerView(rec: Recommendation): BannerView {
  if (rec.action === 'WireOffAt' && rec.m_star !== null) {
    return {
      tone: 'act',
      headline: `WIRE OFF at ${wireoffTimestamp(rec.anchor_epoch_minute, rec.m_star)}`,
      detail: `m* = ${rec.m_star} of ${rec.horizon} minutes`,
      sparkline: sparklinePath(rec.margin),
    };
  }
  return {
    tone: 'hold',
    headline: 'KEEP WIRED ON',
    detail: `no sustained crossing within ${rec.horizon} minutes`,
    sparkline: sparklinePath(rec.margin),
  };
}

export function renderBanner(rec: Recommendation): string {
  const view = bannerView(rec);
  return (
    `<div class="banner banner-${view.tone}">` +
    `<div class="banner-text"><strong>${view.headline}</strong>` +
    `<span class="banner-detail">${view.detail}</span></div>` +
    view.sparkline +
    `</div>`
  );
}
