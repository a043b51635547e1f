import { describe, expect, it } from 'vitest';

import { ApiError, WireoffClient } from '../src/api.js';
import type { Recommendation } from '../src/api.js';
import { fixture } from './helpers.js';

interface RecordedCall {
  url: string;
  init?: RequestInit;
}

function stubClient(status: number, body: unknown, statusText = '') {
  const calls: RecordedCall[] = [];
  const fetcher: typeof fetch = async (input, init) => {
    calls.push({ url: String(input), init });
    const text = typeof body === 'string' ? body : JSON.stringify(body);
    return new Response(text, {
      status,
      statusText,
      headers: { 'Content-Type': 'application/json' },
    });
  };
  return { calls, client: new WireoffClient('/v1', fetcher) };
}

describe('WireoffClient', () => {
  it('parses a recommendation straight off the wire', async () => {
    const recorded = fixture<Recommendation>('crossing', 'recommendation');
    const { calls, client } = stubClient(200, recorded);
    const rec = await client.getRecommendation('abc123');
    expect(rec).toEqual(recorded);
    expect(calls[0]!.url).toBe('/v1/sessions/abc123/recommendation');
  });

  it('builds the forecast query string', async () => {
    const { calls, client } = stubClient(200, fixture('crossing', 'forecast_baseline'));
    await client.getForecast('abc', 'baseline', 45, 'pay-b');
    expect(calls[0]!.url).toBe('/v1/sessions/abc/forecast?kind=baseline&horizon=45&vendor=pay-b');
  });

  it('posts JSON bodies for simulate and whatif', async () => {
    const { calls, client } = stubClient(200, fixture('crossing', 'simulate'));
    await client.simulate('abc', { horizon: 45, replications: 20, seed: 7 });
    expect(calls[0]!.init?.method).toBe('POST');
    expect(JSON.parse(String(calls[0]!.init?.body))).toEqual({
      horizon: 45,
      replications: 20,
      seed: 7,
    });

    const whatIf = stubClient(200, fixture('crossing', 'whatif'));
    const signal = new AbortController().signal;
    await whatIf.client.whatif('abc', 8, signal);
    expect(JSON.parse(String(whatIf.calls[0]!.init?.body))).toEqual({ wireoff_m: 8 });
    expect(whatIf.calls[0]!.init?.signal).toBe(signal); // cancellation plumbs through
  });

  it('turns recorded service errors into ApiError with the detail text', async () => {
    const errors = fixture<Record<string, { status: number; body: { detail: unknown } }>>(
      'crossing',
      'errors',
    );
    const notFound = errors['unknown_session']!;
    const { client } = stubClient(notFound.status, notFound.body);
    const err = await client.getRecommendation('nope').catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(404);
    expect(err.message).toContain('unknown session');

    const outOfRange = errors['whatif_out_of_range']!;
    const bad = stubClient(outOfRange.status, outOfRange.body);
    const err2 = await bad.client.whatif('abc', 100).catch((e) => e);
    expect(err2.status).toBe(400);
    expect(err2.message).toMatch(/wireoff_m/);
  });

  it('flattens field-level validation messages', async () => {
    const errors = fixture<Record<string, { status: number; body: unknown }>>(
      'crossing',
      'errors',
    );
    const missingSeed = errors['simulate_missing_seed']!;
    const { client } = stubClient(missingSeed.status, missingSeed.body);
    const err = await client
      .simulate('abc', { horizon: 10, replications: 2, seed: NaN })
      .catch((e) => e);
    expect(err.status).toBe(400);
    expect(err.message).toBe('Field required at body.seed');
  });

  it('falls back to the status text when the error body is not JSON', async () => {
    const { client } = stubClient(502, 'gateway meltdown', 'Bad Gateway');
    const err = await client.getRecommendation('abc').catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.message).toBe('Bad Gateway');
  });

  it('escapes the session id in paths', async () => {
    const { calls, client } = stubClient(200, fixture('crossing', 'recommendation'));
    await client.getRecommendation('a/b c');
    expect(calls[0]!.url).toBe('/v1/sessions/a%2Fb%20c/recommendation');
  });
});
