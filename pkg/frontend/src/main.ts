import { ApiError, WireoffClient } from './api.js';
import type { Recommendation, WhatifResult } from './api.js';
import { renderBanner } from './banner.js';
import type { Band, Series } from './chart.js';
import { computeLayout, drawChart, markerPositions, tooltipText } from './chart.js';
import { applyRecommendation, cacheWhatif, initialState, moveSlider, resetDerived } from './state.js';
import type { ViewState } from './state.js';
import { WhatifController, formatDifference } from './whatif.js';

const POLL_MS = 30_000;

const client = new WireoffClient();
let state: ViewState | null = null;
let whatif: WhatifController | null = null;
let pollTimer: ReturnType<typeof setInterval> | null = null;

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function pushError(message: string, status?: number) {
  const zone = el<HTMLDivElement>('errors');
  const box = document.createElement('div');
  box.className = 'error-banner';
  box.innerHTML = `<span>${status ? `HTTP ${status} — ` : ''}${message}</span>`;
  const dismiss = document.createElement('button');
  dismiss.textContent = 'dismiss';
  dismiss.addEventListener('click', () => box.remove());
  box.appendChild(dismiss);
  zone.appendChild(box);
}

function surface(err: unknown) {
  if (err instanceof ApiError) {
    if (err.status === 404) {
      pushError(`${err.message} — the session may have expired, reload with a fresh id`, 404);
    } else {
      pushError(err.message, err.status);
    }
  } else {
    pushError(String(err));
  }
}

function seriesFromState(s: ViewState): { series: Series[]; band: Band | null } {
  const series: Series[] = [];
  if (s.baseline) {
    series.push({
      label: 'problematic vendor',
      offsets: s.baseline.offsets,
      values: s.baseline.values,
      color: '#b0b7c3',
      dashed: true,
    });
  }
  if (s.baselineOther) {
    series.push({
      label: 'other vendors',
      offsets: s.baselineOther.offsets,
      values: s.baselineOther.values,
      color: '#6d7787',
      dashed: true,
    });
  }
  const rec = s.recommendation;
  if (rec) {
    const offsets = rec.curves.wiredon.map((_, i) => i + 1);
    series.push({ label: 'W_on', offsets, values: rec.curves.wiredon, color: '#4ea1d3' });
    series.push({ label: 'W_off', offsets, values: rec.curves.wiredoff, color: '#e4572e' });
  } else if (s.wiredoff) {
    series.push({
      label: 'W_off',
      offsets: s.wiredoff.offsets,
      values: s.wiredoff.values,
      color: '#e4572e',
    });
  }
  let band: Band | null = null;
  if (s.simulation) {
    band = {
      offsets: s.simulation.w_on_mean.map((_, i) => i + 1),
      lower: s.simulation.w_on_p10,
      upper: s.simulation.w_on_p90,
      color: 'rgba(78, 161, 211, 0.18)',
    };
  }
  return { series, band };
}

function redraw() {
  if (!state) return;
  const canvas = el<HTMLCanvasElement>('chart');
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const { series, band } = seriesFromState(state);
  if (series.length === 0) return;
  const layout = computeLayout(series, canvas.width, canvas.height);
  drawChart(ctx, series, band, layout, markerPositions(layout, state.mStar, state.sliderM));

  canvas.onmousemove = (ev) => {
    const rect = canvas.getBoundingClientRect();
    const m = layout.minuteAt(((ev.clientX - rect.left) / rect.width) * canvas.width);
    el<HTMLDivElement>('tooltip').textContent =
      m >= layout.mMin && m <= layout.mMax ? tooltipText(series, m) : '';
  };
}

function renderRecommendation() {
  if (!state) return;
  const rec = state.recommendation;
  el<HTMLDivElement>('banner-zone').innerHTML = rec
    ? renderBanner(rec)
    : '<div class="banner banner-pending">no recommendation yet — fit and simulate first</div>';
  const slider = el<HTMLInputElement>('slider');
  slider.min = '1';
  slider.max = String(state.horizon);
  slider.value = String(state.sliderM);
  el<HTMLSpanElement>('slider-m').textContent = `m = ${state.sliderM}`;
}

function showWhatif(result: WhatifResult) {
  if (state) state = cacheWhatif(state, result);
  el<HTMLDivElement>('whatif-out').textContent =
    `wire off at m=${result.wireoff_m}: ${formatDifference(result)} vs staying wired on`;
}

async function refreshRecommendation() {
  if (!state) return;
  try {
    const rec: Recommendation = await client.getRecommendation(state.sessionId);
    const before = JSON.stringify(state.recommendation);
    if (JSON.stringify(rec) !== before) {
      state = applyRecommendation(state, rec);
      renderRecommendation();
      redraw();
    }
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      renderRecommendation(); // not fitted or not simulated yet: keep the hint up
    } else {
      surface(err);
    }
  }
}

async function loadSession(sessionId: string) {
  state = initialState(sessionId);
  whatif = new WhatifController(
    (m, signal) => client.whatif(sessionId, m, signal),
    showWhatif,
    surface,
  );
  el<HTMLDivElement>('console').hidden = false;
  await refreshRecommendation();
  const horizon = state.recommendation?.horizon ?? 60;
  try {
    const [baseline, other, wiredoff] = await Promise.all([
      client.getForecast(sessionId, 'baseline', horizon),
      client.getForecast(sessionId, 'baseline', horizon, 'pay-b').catch(() => null),
      client.getForecast(sessionId, 'wiredoff', horizon),
    ]);
    state = { ...state, baseline, baselineOther: other, wiredoff };
  } catch (err) {
    if (!(err instanceof ApiError && err.status === 409)) surface(err);
  }
  renderRecommendation();
  redraw();
  if (state.mStar !== null) whatif.request(state.mStar);
  if (pollTimer !== null) clearInterval(pollTimer);
  pollTimer = setInterval(refreshRecommendation, POLL_MS);
}

function wireControls() {
  el<HTMLFormElement>('session-form').addEventListener('submit', (ev) => {
    ev.preventDefault();
    const id = el<HTMLInputElement>('session-input').value.trim();
    if (!id) return;
    history.replaceState(null, '', `?session=${encodeURIComponent(id)}`);
    loadSession(id).catch(surface);
  });

  el<HTMLInputElement>('slider').addEventListener('input', () => {
    if (!state || !whatif) return;
    state = moveSlider(state, Number(el<HTMLInputElement>('slider').value));
    el<HTMLSpanElement>('slider-m').textContent = `m = ${state.sliderM}`;
    redraw();
    whatif.request(state.sliderM);
  });

  el<HTMLButtonElement>('run-simulate').addEventListener('click', async () => {
    if (!state) return;
    const seedRaw = el<HTMLInputElement>('sim-seed').value.trim();
    if (!seedRaw) {
      pushError('simulation needs an explicit seed');
      return;
    }
    try {
      const sim = await client.simulate(state.sessionId, {
        horizon: Number(el<HTMLInputElement>('sim-horizon').value) || 60,
        replications: Number(el<HTMLInputElement>('sim-reps').value) || 20,
        seed: Number(seedRaw),
      });
      state = { ...state, simulation: sim };
      whatif?.invalidate();
      await refreshRecommendation();
      redraw();
    } catch (err) {
      surface(err);
    }
  });

  el<HTMLButtonElement>('run-fit').addEventListener('click', async () => {
    if (!state) return;
    try {
      await client.fit(state.sessionId);
      state = resetDerived(state);
      whatif?.invalidate();
      pushError('re-fit complete — run a fresh simulation to get a new recommendation');
      renderRecommendation();
      redraw();
    } catch (err) {
      surface(err);
    }
  });
}

window.addEventListener('DOMContentLoaded', () => {
  wireControls();
  const sessionId = new URLSearchParams(location.search).get('session');
  if (sessionId) {
    el<HTMLInputElement>('session-input').value = sessionId;
    loadSession(sessionId).catch(surface);
  }
});
