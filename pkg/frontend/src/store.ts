// Client-side state: the status board and the per-case edit session.
// Everything shown is reconstructable from API responses; submission is
// blocked on stale draft versions, which the server confirms with a 409.

import { ApiClient, StaleVersionError } from './api.js';
import { buildDraftView, type DraftView } from './draftview.js';
import type {
  CaseState,
  Disposition,
  DraftPayload,
  FeedbackComment,
  FeedbackRequest,
  Stage,
  TracePayload,
} from './types.js';

export interface BoardEntry {
  caseId: string;
  stage: Stage;
  draftVersion: number;
  reviewEnabled: boolean;
  busy: boolean; // regenerating or mid-pipeline: spinner, editing disabled
  error: string | null;
  diagnostics: string[];
}

const TERMINAL: Stage[] = ['awaiting_review', 'finalized', 'failed'];

export function toBoardEntry(state: CaseState): BoardEntry {
  return {
    caseId: state.case_id,
    stage: state.stage,
    draftVersion: state.draft_version,
    reviewEnabled: state.stage === 'awaiting_review' || state.stage === 'finalized',
    busy: !TERMINAL.includes(state.stage) && state.stage !== 'start',
    error: state.stage === 'failed' ? `${state.failed_stage}: ${state.error ?? 'unknown'}` : null,
    diagnostics: state.diagnostics,
  };
}

export function isSettled(state: CaseState): boolean {
  return TERMINAL.includes(state.stage);
}

export class EditSession {
  readonly pendingEdits = new Map<string, string>();
  readonly comments: FeedbackComment[] = [];
  staleNotice = false;

  constructor(public draftVersion: number) {}

  get dirty(): boolean {
    return this.pendingEdits.size > 0 || this.comments.length > 0;
  }

  editSection(section: string, newText: string): void {
    this.pendingEdits.set(section, newText);
  }

  revertSection(section: string): void {
    this.pendingEdits.delete(section);
  }

  addComment(location: string, text: string): void {
    this.comments.push({ location, text });
  }

  buildFeedback(disposition: Disposition, originals: Record<string, string>): FeedbackRequest {
    return {
      draft_version: this.draftVersion,
      disposition,
      edits: [...this.pendingEdits.entries()].map(([section, newText]) => ({
        section,
        old_text: originals[section] ?? '',
        new_text: newText,
      })),
      comments: [...this.comments],
    };
  }

  reset(draftVersion: number): void {
    this.pendingEdits.clear();
    this.comments.length = 0;
    this.staleNotice = false;
    this.draftVersion = draftVersion;
  }
}

export interface ReviewModel {
  view: DraftView;
  session: EditSession;
  narrative: Record<string, string>; // current unmasked prose per section
  previousNarrative: Record<string, string> | null; // version n-1, for diffs
}

export class CaseController {
  constructor(private readonly api: ApiClient) {}

  async submitCase(caseDocument: string): Promise<string> {
    const created = await this.api.createCase(caseDocument);
    await this.api.runCase(created.case_id);
    return created.case_id;
  }

  async fetchBoardEntry(caseId: string): Promise<BoardEntry> {
    return toBoardEntry(await this.api.getState(caseId));
  }

  async openReview(caseId: string): Promise<ReviewModel> {
    const state = await this.api.getState(caseId);
    const draft: DraftPayload = await this.api.getDraft(caseId);
    const trace: TracePayload = await this.api.getTrace(caseId);
    const view = buildDraftView(draft, trace.trace.steps, trace.trace.overall_confidence);
    let previousNarrative: Record<string, string> | null = null;
    if (draft.draft_version > 1) {
      const previous = await this.api.getDraft(caseId, draft.draft_version - 1);
      previousNarrative = previous.sar.narrative;
    }
    return {
      view,
      session: new EditSession(state.draft_version),
      narrative: draft.sar.narrative,
      previousNarrative,
    };
  }

  /**
   * Submit the session's feedback. On a stale draft version the server
   * answers 409; the session flips into the reload-prompt state and the
   * caller re-opens the review against the current version.
   */
  async submitFeedback(
    caseId: string,
    model: ReviewModel,
    disposition: Disposition,
  ): Promise<{ ok: boolean; stage?: Stage; draftVersion?: number }> {
    try {
      const accepted = await this.api.submitFeedback(
        caseId,
        model.session.buildFeedback(disposition, model.narrative),
      );
      return { ok: true, stage: accepted.stage, draftVersion: accepted.draft_version };
    } catch (error) {
      if (error instanceof StaleVersionError) {
        model.session.staleNotice = true;
        return { ok: false };
      }
      throw error;
    }
  }
}
