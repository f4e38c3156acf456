// Payload shapes of the sargen HTTP API.

export type Stage =
  | 'start'
  | 'ingested'
  | 'masked'
  | 'typed'
  | 'agents_done'
  | 'intel_done'
  | 'drafted'
  | 'judged'
  | 'awaiting_review'
  | 'regenerating'
  | 'finalized'
  | 'failed';

export type Verdict = 'pass' | 'needs_review' | 'block';
export type FlagSeverity = 'warn' | 'block';
export type Disposition = 'approve' | 'request_regeneration';

export interface CaseState {
  case_id: string;
  stage: Stage;
  stage_history: Array<{ stage: string; entered_at: string; outcome: string; artifacts: string[] }>;
  artifacts: Record<string, string>;
  diagnostics: string[];
  draft_version: number;
  regen_cycles: number;
  failed_stage: string | null;
  error: string | null;
}

export interface JudgeFlag {
  kind: string;
  severity: FlagSeverity;
  location: { section: string | null; sentence: number | null };
  expected: string;
  found: string;
  evidence: string[];
}

export interface SarDocument {
  case_id: string;
  draft_version: number;
  subjects: Array<Record<string, unknown>>;
  activity: {
    date_range: [string | null, string | null];
    typologies: string[];
    total_credits: Record<string, string>;
    total_debits: Record<string, string>;
  };
  institution: Record<string, string>;
  filer_contact: Record<string, string>;
  narrative: Record<string, string>;
  supporting_documentation: string[];
  overall_confidence: number;
}

export interface DraftPayload {
  case_id: string;
  draft_version: number;
  verdict: Verdict;
  sar: SarDocument;
  flags: JudgeFlag[];
}

export interface TraceStep {
  step_id: string;
  description: string;
  inputs: string[];
  conclusion: string;
  confidence: {
    evidentiary_strength: number;
    contextual_relevance: number;
    regulatory_adherence: number;
    combined: number;
  };
}

export interface TracePayload {
  case_id: string;
  draft_version: number;
  trace: { steps: TraceStep[]; overall_confidence: number };
}

export interface FeedbackEdit {
  section: string;
  old_text: string;
  new_text: string;
}

export interface FeedbackComment {
  location: string;
  text: string;
}

export interface FeedbackRequest {
  draft_version: number;
  disposition: Disposition;
  edits: FeedbackEdit[];
  comments: FeedbackComment[];
}

export interface FeedbackAccepted {
  case_id: string;
  stage: Stage;
  draft_version: number;
}

export const SECTION_ORDER = [
  'who',
  'what',
  'when',
  'where',
  'how',
  'why',
  'supporting_information',
] as const;

export type SectionName = (typeof SECTION_ORDER)[number];
