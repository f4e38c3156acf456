// End-to-end review loop against a live local service with the mock adapter:
// open case -> see flags -> edit -> request regeneration -> approve ->
// finalized, plus the stale-version 409 recovery path.

import { spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync, readFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join, resolve } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient, StaleVersionError } from '../src/api.js';
import { buildDraftView, flagCount } from '../src/draftview.js';
import { changedSections } from '../src/diff.js';
import { renderReview, renderStalePrompt } from '../src/render.js';
import { CaseController, EditSession, toBoardEntry } from '../src/store.js';

const REPO_ROOT = resolve(__dirname, '..', '..');
const CASE_FILE = join(REPO_ROOT, 'fixtures', 'case_01.json');

let server: ChildProcess;
let api: ApiClient;
let controller: CaseController;

async function waitFor<T>(
  fn: () => Promise<T>,
  done: (value: T) => boolean,
  timeoutMs = 60_000,
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  let last: T;
  for (;;) {
    last = await fn();
    if (done(last)) return last;
    if (Date.now() > deadline) throw new Error(`timed out waiting; last=${JSON.stringify(last)}`);
    await new Promise((r) => setTimeout(r, 250));
  }
}

beforeAll(async () => {
  const store = join(mkdtempSync(join(tmpdir(), 'sargen-ui-')), 'cases.log');
  server = spawn(
    'python3',
    ['-m', 'sargen.cli', 'serve', '--port', '0', '--mock', '--store', store],
    { cwd: REPO_ROOT, stdio: ['ignore', 'pipe', 'inherit'] },
  );
  const port = await new Promise<number>((resolvePort, rejectPort) => {
    const timer = setTimeout(() => rejectPort(new Error('service never announced a port')), 30_000);
    server.stdout!.on('data', (chunk: Buffer) => {
      const match = /http:\/\/127\.0\.0\.1:(\d+)/.exec(chunk.toString());
      if (match) {
        clearTimeout(timer);
        resolvePort(Number(match[1]));
      }
    });
    server.on('exit', (code) => rejectPort(new Error(`service exited early (${code})`)));
  });
  api = new ApiClient({ baseUrl: `http://127.0.0.1:${port}` });
  controller = new CaseController(api);
  await waitFor(
    () => fetch(`http://127.0.0.1:${port}/healthz`).then((r) => r.ok).catch(() => false),
    (ok) => ok === true,
    30_000,
  );
}, 60_000);

afterAll(() => {
  server?.kill();
});

describe('review loop against the live service', () => {
  it('runs the recorded flow to finalized and surfaces the 409 recovery', async () => {
    // open case
    const caseId = await controller.submitCase(readFileSync(CASE_FILE, 'utf-8'));
    const settled = await waitFor(
      () => api.getState(caseId),
      (s) => s.stage === 'awaiting_review' || s.stage === 'failed',
    );
    expect(settled.stage).toBe('awaiting_review');
    expect(toBoardEntry(settled).reviewEnabled).toBe(true);

    // clean first draft: zero flags on the review screen
    let review = await controller.openReview(caseId);
    expect(review.view.verdict).toBe('pass');
    expect(flagCount(review.view)).toBe(0);

    // an approve with a non-derivable amount is gated by the judge; the
    // refreshed review now SHOWS flags inline
    review.session.editSection('what', 'Debits totaling $999,999.00 left the account.');
    const gated = await controller.submitFeedback(caseId, review, 'approve');
    expect(gated.ok).toBe(true);
    expect(gated.stage).toBe('awaiting_review'); // gate refused to finalize
    review = await controller.openReview(caseId);
    expect(review.view.verdict).toBe('block');
    expect(flagCount(review.view)).toBeGreaterThan(0);
    const html = renderReview(review.view, true);
    expect(html).toContain('flag-block');

    // edit + request regeneration -> draft v2
    review.session.addComment('where', 'expand the where section with corridor detail');
    const regen = await controller.submitFeedback(caseId, review, 'request_regeneration');
    expect(regen.ok).toBe(true);
    expect(regen.draftVersion).toBe(2);

    // version diff: only the where section changed
    const v2 = await controller.openReview(caseId);
    expect(v2.view.version).toBe(2);
    expect(v2.previousNarrative).not.toBeNull();
    expect(changedSections(v2.previousNarrative!, v2.narrative)).toEqual(['where']);

    // stale submission (draft v1) surfaces the 409 recovery path
    const staleModel = { ...v2, session: new EditSession(1) };
    const stale = await controller.submitFeedback(caseId, staleModel, 'approve');
    expect(stale.ok).toBe(false);
    expect(staleModel.session.staleNotice).toBe(true);
    expect(renderStalePrompt(2)).toContain('Reload latest draft');
    // recovery: reload the latest review
    const reloaded = await controller.openReview(caseId);
    expect(reloaded.session.draftVersion).toBe(2);

    // approve the clean v2 -> finalized
    const approved = await controller.submitFeedback(caseId, reloaded, 'approve');
    expect(approved.ok).toBe(true);
    expect(approved.stage).toBe('finalized');
    const final = await waitFor(
      () => api.getState(caseId),
      (s) => s.stage === 'finalized',
    );
    expect(final.draft_version).toBe(2);
  }, 120_000);

  it('raw 409 from the API maps to StaleVersionError', async () => {
    const caseId = await controller.submitCase(
      readFileSync(CASE_FILE, 'utf-8').replace('"case-01"', '"case-stale"'),
    );
    await waitFor(
      () => api.getState(caseId),
      (s) => s.stage === 'awaiting_review',
    );
    await api.submitFeedback(caseId, {
      draft_version: 1,
      disposition: 'request_regeneration',
      edits: [],
      comments: [{ location: 'how', text: 'detail the mechanism' }],
    });
    await expect(
      api.submitFeedback(caseId, {
        draft_version: 1,
        disposition: 'approve',
        edits: [],
        comments: [],
      }),
    ).rejects.toBeInstanceOf(StaleVersionError);
  }, 120_000);

  it('draft endpoint content renders with no mask tokens', async () => {
    const caseId = 'case-01';
    const draft = await api.getDraft(caseId, 1);
    const trace = await api.getTrace(caseId, 1);
    const view = buildDraftView(draft, trace.trace.steps, trace.trace.overall_confidence);
    const html = renderReview(view, false);
    expect(html).not.toMatch(/\[\[[A-Z]+_\d+\]\]/);
    expect(html).toContain('John Smith');
  }, 60_000);
});
