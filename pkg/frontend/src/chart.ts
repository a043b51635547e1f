const PAD_LEFT = 46;
const PAD_RIGHT = 14;
const PAD_TOP = 10;
const PAD_BOTTOM = 24;

/** Past this many points a series is min-max decimated before drawing. */
export const DECIMATION_THRESHOLD = 10_000;

export interface Series {
  label: string;
  offsets: number[];
  values: number[];
  color: string;
  dashed?: boolean;
}

export interface Band {
  offsets: number[];
  lower: number[];
  upper: number[];
  color: string;
}

export interface ChartLayout {
  width: number;
  height: number;
  mMin: number;
  mMax: number;
  yMin: number;
  yMax: number;
  xFor(m: number): number;
  yFor(v: number): number;
  minuteAt(x: number): number;
}

export function computeLayout(series: Series[], width: number, height: number): ChartLayout {
  let mMin = 0;
  let mMax = 1;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const s of series) {
    for (const m of s.offsets) {
      if (m < mMin) mMin = m;
      if (m > mMax) mMax = m;
    }
    for (const v of s.values) {
      if (v < yMin) yMin = v;
      if (v > yMax) yMax = v;
    }
  }
  if (!Number.isFinite(yMin)) {
    yMin = 0;
    yMax = 1;
  }
  if (yMax === yMin) yMax = yMin + 1;
  const span = yMax - yMin;
  yMin -= span * 0.05;
  yMax += span * 0.05;

  const innerW = width - PAD_LEFT - PAD_RIGHT;
  const innerH = height - PAD_TOP - PAD_BOTTOM;
  const xFor = (m: number) => PAD_LEFT + ((m - mMin) / (mMax - mMin)) * innerW;
  const yFor = (v: number) => PAD_TOP + (1 - (v - yMin) / (yMax - yMin)) * innerH;
  const minuteAt = (x: number) =>
    Math.round(mMin + ((x - PAD_LEFT) / innerW) * (mMax - mMin));
  return { width, height, mMin, mMax, yMin, yMax, xFor, yFor, minuteAt };
}

/**
 * Min-max decimation: one bucket per retained pair, keeping each bucket's
 * extremes so spikes survive. Series at or under the budget pass through.
 */
export function decimate(
  offsets: number[],
  values: number[],
  maxPoints: number = DECIMATION_THRESHOLD,
): { offsets: number[]; values: number[] } {
  const n = offsets.length;
  if (n <= maxPoints) return { offsets, values };
  const buckets = Math.max(1, Math.floor(maxPoints / 2));
  const outOffsets: number[] = [];
  const outValues: number[] = [];
  for (let b = 0; b < buckets; b++) {
    const start = Math.floor((b * n) / buckets);
    const end = Math.max(start + 1, Math.floor(((b + 1) * n) / buckets));
    let loIdx = start;
    let hiIdx = start;
    for (let i = start; i < end; i++) {
      const v = values[i]!;
      if (v < values[loIdx]!) loIdx = i;
      if (v > values[hiIdx]!) hiIdx = i;
    }
    const first = Math.min(loIdx, hiIdx);
    const second = Math.max(loIdx, hiIdx);
    outOffsets.push(offsets[first]!);
    outValues.push(values[first]!);
    if (second !== first) {
      outOffsets.push(offsets[second]!);
      outValues.push(values[second]!);
    }
  }
  return { offsets: outOffsets, values: outValues };
}

export interface MarkerPixels {
  t0: number;
  mStar: number | null;
  slider: number;
}

export function markerPositions(
  layout: ChartLayout,
  mStar: number | null,
  sliderM: number,
): MarkerPixels {
  return {
    t0: layout.xFor(0),
    mStar: mStar === null ? null : layout.xFor(mStar),
    slider: layout.xFor(sliderM),
  };
}

export function tooltipText(series: Series[], m: number): string {
  const parts: string[] = [`m=${m}`];
  for (const s of series) {
    const idx = s.offsets.indexOf(m);
    if (idx >= 0) parts.push(`${s.label} ${s.values[idx]!.toFixed(1)}`);
  }
  return parts.join('  ');
}

function drawSeries(ctx: CanvasRenderingContext2D, layout: ChartLayout, s: Series): void {
  const { offsets, values } = decimate(s.offsets, s.values);
  ctx.strokeStyle = s.color;
  ctx.lineWidth = 1.5;
  ctx.setLineDash(s.dashed ? [5, 3] : []);
  ctx.beginPath();
  for (let i = 0; i < offsets.length; i++) {
    const x = layout.xFor(offsets[i]!);
    const y = layout.yFor(values[i]!);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  }
  ctx.stroke();
  ctx.setLineDash([]);
}

function drawBand(ctx: CanvasRenderingContext2D, layout: ChartLayout, band: Band): void {
  ctx.fillStyle = band.color;
  ctx.beginPath();
  for (let i = 0; i < band.offsets.length; i++) {
    const x = layout.xFor(band.offsets[i]!);
    const y = layout.yFor(band.upper[i]!);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  }
  for (let i = band.offsets.length - 1; i >= 0; i--) {
    ctx.lineTo(layout.xFor(band.offsets[i]!), layout.yFor(band.lower[i]!));
  }
  ctx.closePath();
  ctx.fill();
}

function drawMarker(
  ctx: CanvasRenderingContext2D,
  layout: ChartLayout,
  x: number,
  label: string,
  color: string,
): void {
  ctx.strokeStyle = color;
  ctx.lineWidth = 1;
  ctx.setLineDash([2, 2]);
  ctx.beginPath();
  ctx.moveTo(x, PAD_TOP);
  ctx.lineTo(x, layout.height - PAD_BOTTOM);
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.fillStyle = color;
  ctx.font = '10px sans-serif';
  ctx.fillText(label, x + 3, PAD_TOP + 10);
}

export function drawChart(
  ctx: CanvasRenderingContext2D,
  series: Series[],
  band: Band | null,
  layout: ChartLayout,
  markers: MarkerPixels,
): void {
  ctx.clearRect(0, 0, layout.width, layout.height);

  // y axis with a handful of round-ish ticks
  ctx.strokeStyle = '#445';
  ctx.fillStyle = '#99a';
  ctx.font = '10px sans-serif';
  ctx.lineWidth = 1;
  const ticks = 4;
  for (let t = 0; t <= ticks; t++) {
    const v = layout.yMin + ((layout.yMax - layout.yMin) * t) / ticks;
    const y = layout.yFor(v);
    ctx.globalAlpha = 0.35;
    ctx.beginPath();
    ctx.moveTo(PAD_LEFT, y);
    ctx.lineTo(layout.width - PAD_RIGHT, y);
    ctx.stroke();
    ctx.globalAlpha = 1;
    ctx.fillText(v.toFixed(0), 4, y + 3);
  }
  for (let m = layout.mMin; m <= layout.mMax; m += 10) {
    ctx.fillText(String(m), layout.xFor(m) - 4, layout.height - 8);
  }

  if (band) drawBand(ctx, layout, band);
  for (const s of series) drawSeries(ctx, layout, s);

  drawMarker(ctx, layout, markers.t0, 't0', '#888');
  if (markers.mStar !== null) drawMarker(ctx, layout, markers.mStar, 'm*', '#e4572e');
  drawMarker(ctx, layout, markers.slider, 'what-if', '#4ea1d3');
}
