import { describe, expect, it } from 'vitest';

import { buildDraftView } from '../src/draftview.js';
import { renderBoard, renderDiff, renderReview, renderStalePrompt } from '../src/render.js';
import { toBoardEntry } from '../src/store.js';
import { diffWords } from '../src/diff.js';
import type { CaseState, DraftPayload, JudgeFlag } from '../src/types.js';

const baseState: CaseState = {
  case_id: 'case-ui',
  stage: 'awaiting_review',
  stage_history: [],
  artifacts: {},
  diagnostics: [],
  draft_version: 1,
  regen_cycles: 0,
  failed_stage: null,
  error: null,
};

function payload(flags: JudgeFlag[]): DraftPayload {
  return {
    case_id: 'case-ui',
    draft_version: 1,
    verdict: flags.length ? 'block' : 'pass',
    sar: {
      case_id: 'case-ui',
      draft_version: 1,
      subjects: [],
      activity: {
        date_range: [null, null],
        typologies: [],
        total_credits: {},
        total_debits: {},
      },
      institution: {},
      filer_contact: {},
      narrative: {
        who: 'Jane Roe holds the account.',
        what: 'Amounts match the ledger. A burst occurred.',
        when: 'January.',
        where: 'Overseas.',
        how: 'Wires.',
        why: 'Mule pattern.',
        supporting_information: 'Records retained.',
      },
      supporting_documentation: [],
      overall_confidence: 0.4,
    },
    flags,
  };
}

describe('renderBoard', () => {
  it('shows stage chips and enables Review for awaiting_review', () => {
    const html = renderBoard([toBoardEntry(baseState)]);
    expect(html).toContain('chip-review');
    expect(html).toContain('data-action="review"');
  });

  it('shows the error panel for failed cases', () => {
    const html = renderBoard([
      toBoardEntry({ ...baseState, stage: 'failed', failed_stage: 'ingested', error: 'boom' }),
    ]);
    expect(html).toContain('error-panel');
    expect(html).toContain('ingested');
  });

  it('shows a spinner for regenerating cases', () => {
    const html = renderBoard([toBoardEntry({ ...baseState, stage: 'regenerating' })]);
    expect(html).toContain('spinner');
    expect(html).not.toContain('data-action="review"');
  });
});

describe('renderReview', () => {
  it('block flags underline the offending sentence in red with a tooltip', () => {
    const flags: JudgeFlag[] = [
      {
        kind: 'amount_mismatch',
        severity: 'block',
        location: { section: 'what', sentence: 0 },
        expected: '$12,000.00',
        found: '$13,000.00',
        evidence: [],
      },
    ];
    const view = buildDraftView(payload(flags), [], 0.4);
    const html = renderReview(view, true);
    expect(html).toContain('sentence-block');
    expect(html).toContain('flag-block');
    expect(html).toContain('expected: $12,000.00 | found: $13,000.00');
  });

  it('clean drafts render with no flag markup', () => {
    const html = renderReview(buildDraftView(payload([]), [], 0.4), true);
    expect(html).not.toContain('flag-block');
    expect(html).not.toContain('flag-warn');
  });

  it('renders each flag exactly once', () => {
    const flags: JudgeFlag[] = [
      {
        kind: 'coherence',
        severity: 'warn',
        location: { section: null, sentence: null },
        expected: 'ordered sections',
        found: 'scrambled',
        evidence: [],
      },
    ];
    const html = renderReview(buildDraftView(payload(flags), [], 0.4), false);
    expect(html.match(/flag-warn/g)).toHaveLength(1);
  });

  it('never emits mask tokens (content comes from the unmasked endpoint)', () => {
    const html = renderReview(buildDraftView(payload([]), [], 0.4), true);
    expect(html).not.toMatch(/\[\[[A-Z]+_\d+\]\]/);
  });
});

describe('renderDiff and stale prompt', () => {
  it('wraps insertions and deletions', () => {
    const html = renderDiff(diffWords('old words here', 'new words here'));
    expect(html).toContain('<del>old</del>');
    expect(html).toContain('<ins>new</ins>');
  });

  it('stale prompt offers the reload action', () => {
    const html = renderStalePrompt(3);
    expect(html).toContain('v3');
    expect(html).toContain('data-action="reload"');
  });
});
