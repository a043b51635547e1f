import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

const here = dirname(fileURLToPath(import.meta.url));

/** Load one recorded service response from tests/fixtures/<scenario>/. */
export function fixture<T>(scenario: 'crossing' | 'no_crossing', name: string): T {
  const path = join(here, 'fixtures', scenario, `${name}.json`);
  return JSON.parse(readFileSync(path, 'utf-8')) as T;
}
