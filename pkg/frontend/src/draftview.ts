// DraftView assembly: map the API payloads onto the structure the review
// screen renders. Every judge flag is anchored exactly once - inline when it
// carries a (section, sentence) location, otherwise in the general panel.

import type { DraftPayload, JudgeFlag, TraceStep } from './types.js';
import { SECTION_ORDER } from './types.js';

export interface SentenceView {
  index: number;
  text: string;
  flags: JudgeFlag[];
}

export interface SectionView {
  name: string;
  sentences: SentenceView[];
  sectionFlags: JudgeFlag[]; // located in this section but not on a sentence
}

export interface DraftView {
  caseId: string;
  version: number;
  verdict: string;
  sections: SectionView[];
  generalFlags: JudgeFlag[]; // no usable location
  confidenceBadges: Array<{ stepId: string; combined: number }>;
  overallConfidence: number;
  activity: DraftPayload['sar']['activity'];
  subjects: DraftPayload['sar']['subjects'];
}

// Display-only sentence split; compliance decisions never depend on it.
export function splitSentences(prose: string): string[] {
  const parts = prose.split(/(?<=[.!?])\s+/).filter((s) => s.length > 0);
  return parts.length > 0 ? parts : prose ? [prose] : [];
}

export function buildDraftView(
  draft: DraftPayload,
  traceSteps: TraceStep[],
  overallConfidence: number,
): DraftView {
  const sections: SectionView[] = [];
  const placed = new Set<JudgeFlag>();
  for (const name of SECTION_ORDER) {
    const prose = draft.sar.narrative[name] ?? '';
    const sentences = splitSentences(prose).map((text, index) => ({
      index,
      text,
      flags: [] as JudgeFlag[],
    }));
    const sectionFlags: JudgeFlag[] = [];
    for (const flag of draft.flags) {
      if (flag.location.section !== name || placed.has(flag)) continue;
      const sentenceIndex = flag.location.sentence;
      if (sentenceIndex !== null && sentenceIndex >= 0 && sentenceIndex < sentences.length) {
        sentences[sentenceIndex]!.flags.push(flag);
      } else {
        sectionFlags.push(flag);
      }
      placed.add(flag);
    }
    sections.push({ name, sentences, sectionFlags });
  }
  const generalFlags = draft.flags.filter((flag) => !placed.has(flag));
  return {
    caseId: draft.case_id,
    version: draft.draft_version,
    verdict: draft.verdict,
    sections,
    generalFlags,
    confidenceBadges: traceSteps.map((step) => ({
      stepId: step.step_id,
      combined: step.confidence.combined,
    })),
    overallConfidence,
    activity: draft.sar.activity,
    subjects: draft.sar.subjects,
  };
}

export function flagCount(view: DraftView): number {
  let inline = 0;
  for (const section of view.sections) {
    inline += section.sectionFlags.length;
    for (const sentence of section.sentences) inline += sentence.flags.length;
  }
  return inline + view.generalFlags.length;
}
