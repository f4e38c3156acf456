// Pure HTML-string renderers: no DOM dependency, unit-testable, and the
// browser shell only injects the output and wires events.

import type { DiffToken } from './diff.js';
import type { DraftView, SectionView } from './draftview.js';
import type { BoardEntry } from './store.js';
import type { JudgeFlag } from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;');
}

const STAGE_CHIP_CLASS: Record<string, string> = {
  awaiting_review: 'chip-review',
  finalized: 'chip-done',
  failed: 'chip-failed',
};

export function renderBoard(entries: BoardEntry[]): string {
  const rows = entries
    .map((entry) => {
      const chipClass = STAGE_CHIP_CLASS[entry.stage] ?? 'chip-busy';
      const spinner = entry.busy ? '<span class="spinner" aria-label="working"></span>' : '';
      const action = entry.reviewEnabled
        ? `<button data-action="review" data-case="${escapeHtml(entry.caseId)}">Review</button>`
        : '';
      const error = entry.error
        ? `<div class="error-panel">${escapeHtml(entry.error)}</div>`
        : '';
      return `<tr>
        <td>${escapeHtml(entry.caseId)}</td>
        <td><span class="chip ${chipClass}">${escapeHtml(entry.stage)}</span>${spinner}</td>
        <td>v${entry.draftVersion}</td>
        <td>${action}${error}</td>
      </tr>`;
    })
    .join('\n');
  return `<table class="board"><thead><tr><th>case</th><th>stage</th><th>draft</th><th></th></tr></thead><tbody>${rows}</tbody></table>`;
}

function flagMarker(flag: JudgeFlag): string {
  const cls = flag.severity === 'block' ? 'flag-block' : 'flag-warn';
  const tooltip = `expected: ${flag.expected} | found: ${flag.found}`;
  return `<span class="flag ${cls}" title="${escapeHtml(tooltip)}">${escapeHtml(flag.kind)}</span>`;
}

function renderSection(section: SectionView, editable: boolean): string {
  const sentences = section.sentences
    .map((sentence) => {
      const markers = sentence.flags.map(flagMarker).join('');
      const underline = sentence.flags.some((f) => f.severity === 'block')
        ? 'sentence-block'
        : sentence.flags.length > 0
          ? 'sentence-warn'
          : '';
      return `<span class="sentence ${underline}" data-sentence="${sentence.index}">${escapeHtml(sentence.text)}${markers}</span>`;
    })
    .join(' ');
  const sectionFlags = section.sectionFlags.map(flagMarker).join('');
  const editButton = editable
    ? `<button data-action="edit" data-section="${section.name}">Edit</button>`
    : '';
  return `<section class="draft-section" data-section="${section.name}">
    <h3>${escapeHtml(section.name)} ${sectionFlags} ${editButton}</h3>
    <p>${sentences}</p>
  </section>`;
}

export function renderReview(view: DraftView, editable: boolean): string {
  const badges = view.confidenceBadges
    .map(
      (badge) =>
        `<span class="badge" data-step="${escapeHtml(badge.stepId)}">${escapeHtml(badge.stepId)}: ${badge.combined.toFixed(2)}</span>`,
    )
    .join('');
  const general = view.generalFlags.length
    ? `<div class="general-flags">${view.generalFlags.map(flagMarker).join('')}</div>`
    : '';
  const sections = view.sections.map((s) => renderSection(s, editable)).join('\n');
  return `<article class="review" data-version="${view.version}">
    <header>
      <h2>${escapeHtml(view.caseId)} - draft v${view.version} - verdict ${escapeHtml(view.verdict)}</h2>
      <div class="confidence">overall ${view.overallConfidence.toFixed(2)} ${badges}</div>
      ${general}
    </header>
    ${sections}
  </article>`;
}

export function renderDiff(tokens: DiffToken[]): string {
  return tokens
    .map((token) => {
      if (token.op === 'added') return `<ins>${escapeHtml(token.text)}</ins>`;
      if (token.op === 'removed') return `<del>${escapeHtml(token.text)}</del>`;
      return escapeHtml(token.text);
    })
    .join(' ');
}

export function renderStalePrompt(currentVersion: number): string {
  return `<div class="stale-prompt" role="alert">
    This draft was superseded (current is v${currentVersion}). Your submission was not applied.
    <button data-action="reload">Reload latest draft</button>
  </div>`;
}

export function renderVersionSelector(current: number, latest: number): string {
  const options = Array.from({ length: latest }, (_, i) => i + 1)
    .map((v) => `<option value="${v}" ${v === current ? 'selected' : ''}>v${v}</option>`)
    .join('');
  return `<select data-action="select-version">${options}</select>`;
}
