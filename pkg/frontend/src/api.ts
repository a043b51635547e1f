const API_BASE = '/v1';

export type Action = 'WireOffAt' | 'KeepWiredOn';

export interface Recommendation {
  action: Action;
  m_star: number | null;
  horizon: number;
  anchor_epoch_minute: number;
  curves: { wiredon: number[]; wiredoff: number[] };
  margin: number[];
}

export interface ForecastCurve {
  session_id: string;
  kind: 'baseline' | 'availability' | 'wiredoff';
  horizon: number;
  offsets: number[];
  values: number[];
}

export interface WiredOnForecast {
  anchor_epoch_minute: number;
  horizon: number;
  replications: number;
  master_seed: number;
  c_other: number[];
  w_on_mean: number[];
  w_on_p10: number[];
  w_on_p90: number[];
}

export interface WhatifResult {
  total_completed_off_path: number;
  total_completed_on_path: number;
  difference: number;
  wireoff_m: number;
}

export interface FitSummary {
  version: number;
  baselines: Record<string, unknown>;
  wiredoff: { delta: number } & Record<string, unknown>;
}

/** Error body surfaced by the service; every non-2xx lands here. */
export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = 'ApiError';
  }
}

interface FieldMessage {
  loc?: (string | number)[];
  msg?: string;
}

async function toError(res: Response): Promise<ApiError> {
  let detail = res.statusText || `HTTP ${res.status}`;
  try {
    const body = await res.json();
    if (body && typeof body.detail === 'string') {
      detail = body.detail;
    } else if (body && Array.isArray(body.detail)) {
      // field-level validation messages
      detail = (body.detail as FieldMessage[])
        .map((d) => `${d.msg ?? 'invalid'} at ${(d.loc ?? []).join('.')}`)
        .join('; ');
    }
  } catch {
    // non-JSON error body, keep the status text
  }
  return new ApiError(res.status, detail);
}

export class WireoffClient {
  constructor(
    private base: string = API_BASE,
    private fetcher: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetcher(`${this.base}${path}`, init);
    if (!res.ok) throw await toError(res);
    return res.json() as Promise<T>;
  }

  private post<T>(path: string, body: unknown, signal?: AbortSignal): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
      signal,
    });
  }

  getRecommendation(sessionId: string): Promise<Recommendation> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/recommendation`);
  }

  getForecast(
    sessionId: string,
    kind: ForecastCurve['kind'],
    horizon: number,
    vendor?: string,
  ): Promise<ForecastCurve> {
    const params = new URLSearchParams({ kind, horizon: String(horizon) });
    if (vendor) params.set('vendor', vendor);
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/forecast?${params}`);
  }

  simulate(
    sessionId: string,
    body: { horizon: number; replications: number; seed: number },
  ): Promise<WiredOnForecast> {
    return this.post(`/sessions/${encodeURIComponent(sessionId)}/simulate`, body);
  }

  fit(sessionId: string, body: Record<string, unknown> = {}): Promise<FitSummary> {
    return this.post(`/sessions/${encodeURIComponent(sessionId)}/fit`, body);
  }

  whatif(sessionId: string, wireoffM: number, signal?: AbortSignal): Promise<WhatifResult> {
    return this.post(
      `/sessions/${encodeURIComponent(sessionId)}/whatif`,
      { wireoff_m: wireoffM },
      signal,
    );
  }
}
