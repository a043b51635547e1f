import type { ForecastCurve, Recommendation, WhatifResult, WiredOnForecast } from './api.js';

export interface ViewState {
  sessionId: string;
  /** candidate wire-off minute under the slider, always within [1, horizon] */
  sliderM: number;
  horizon: number;
  /** marker minute from the latest recommendation; null means keep wired on */
  mStar: number | null;
  recommendation: Recommendation | null;
  baseline: ForecastCurve | null;
  baselineOther: ForecastCurve | null;
  wiredoff: ForecastCurve | null;
  simulation: WiredOnForecast | null;
  whatifCache: Map<number, WhatifResult>;
}

export function initialState(sessionId: string): ViewState {
  return {
    sessionId,
    sliderM: 1,
    horizon: 1,
    mStar: null,
    recommendation: null,
    baseline: null,
    baselineOther: null,
    wiredoff: null,
    simulation: null,
    whatifCache: new Map(),
  };
}

export function clampSlider(m: number, horizon: number): number {
  if (!Number.isFinite(m)) return 1;
  return Math.min(Math.max(Math.round(m), 1), Math.max(horizon, 1));
}

/**
 * Fold a recommendation response into the state. The marker always mirrors
 * the response; the slider snaps to m* the first time one is known and is
 * re-clamped if the horizon shrank.
 */
export function applyRecommendation(state: ViewState, rec: Recommendation): ViewState {
  const sliderM =
    state.recommendation === null && rec.m_star !== null
      ? rec.m_star
      : clampSlider(state.sliderM, rec.horizon);
  return { ...state, recommendation: rec, mStar: rec.m_star, horizon: rec.horizon, sliderM };
}

export function moveSlider(state: ViewState, m: number): ViewState {
  return { ...state, sliderM: clampSlider(m, state.horizon) };
}

export function cacheWhatif(state: ViewState, result: WhatifResult): ViewState {
  const whatifCache = new Map(state.whatifCache);
  whatifCache.set(result.wireoff_m, result);
  return { ...state, whatifCache };
}

/** A re-fit invalidates every number derived from the previous artifacts. */
export function resetDerived(state: ViewState): ViewState {
  return {
    ...state,
    recommendation: null,
    mStar: null,
    baseline: null,
    baselineOther: null,
    wiredoff: null,
    simulation: null,
    whatifCache: new Map(),
  };
}
