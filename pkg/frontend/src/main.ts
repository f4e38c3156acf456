// Browser shell: wires the pure renderers and the controller to the DOM.
// Configuration comes from the page: window.SARGEN_API_URL (+ optional token).

import { ApiClient } from './api.js';
import { changedSections, diffWords } from './diff.js';
import { Poller } from './poll.js';
import {
  renderBoard,
  renderDiff,
  renderReview,
  renderStalePrompt,
  renderVersionSelector,
} from './render.js';
import { CaseController, toBoardEntry, isSettled, type ReviewModel } from './store.js';
import type { CaseState } from './types.js';

declare global {
  interface Window {
    SARGEN_API_URL?: string;
    SARGEN_API_TOKEN?: string;
  }
}

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

export function bootstrap(): void {
  const api = new ApiClient({
    baseUrl: window.SARGEN_API_URL ?? 'http://127.0.0.1:8040',
    token: window.SARGEN_API_TOKEN,
  });
  const controller = new CaseController(api);
  const boardHost = el('board');
  const reviewHost = el('review');
  const knownCases = new Map<string, CaseState>();
  let current: { caseId: string; model: ReviewModel } | null = null;

  function repaintBoard(): void {
    boardHost.innerHTML = renderBoard([...knownCases.values()].map(toBoardEntry));
  }

  function watch(caseId: string): void {
    const poller = new Poller<CaseState>({
      fetchOnce: () => api.getState(caseId),
      onResult: (state) => {
        knownCases.set(caseId, state);
        repaintBoard();
      },
      isDone: isSettled,
    });
    poller.start();
  }

  async function openReview(caseId: string): Promise<void> {
    const model = await controller.openReview(caseId);
    current = { caseId, model };
    const editable = knownCases.get(caseId)?.stage === 'awaiting_review';
    let html = renderVersionSelector(model.view.version, model.view.version);
    html += renderReview(model.view, editable);
    if (model.previousNarrative) {
      for (const section of changedSections(model.previousNarrative, model.narrative)) {
        html += `<h4>diff ${section} (v${model.view.version - 1} to v${model.view.version})</h4>`;
        html += `<div class="diff">${renderDiff(
          diffWords(model.previousNarrative[section] ?? '', model.narrative[section] ?? ''),
        )}</div>`;
      }
    }
    reviewHost.innerHTML = html;
  }

  async function submit(disposition: 'approve' | 'request_regeneration'): Promise<void> {
    if (!current) return;
    const outcome = await controller.submitFeedback(current.caseId, current.model, disposition);
    if (!outcome.ok) {
      const latest = await api.getState(current.caseId);
      reviewHost.insertAdjacentHTML('afterbegin', renderStalePrompt(latest.draft_version));
      return;
    }
    watch(current.caseId);
    await openReview(current.caseId);
  }

  document.addEventListener('click', (event) => {
    const target = event.target as HTMLElement;
    const action = target.dataset['action'];
    if (action === 'review' && target.dataset['case']) {
      void openReview(target.dataset['case']);
    } else if (action === 'reload' && current) {
      void openReview(current.caseId);
    } else if (action === 'edit' && current && target.dataset['section']) {
      const section = target.dataset['section'];
      const existing = current.model.narrative[section] ?? '';
      const edited = window.prompt(`Edit ${section}`, existing);
      if (edited !== null && edited !== existing) {
        current.model.session.editSection(section, edited);
      }
    }
  });

  el('submit-case').addEventListener('click', async () => {
    const text = (el('case-input') as HTMLTextAreaElement).value;
    const caseId = await controller.submitCase(text);
    watch(caseId);
  });
  el('approve').addEventListener('click', () => void submit('approve'));
  el('regenerate').addEventListener('click', () => {
    if (current) {
      const note = window.prompt('Comment for regeneration', '');
      if (note) current.model.session.addComment('general', note);
    }
    void submit('request_regeneration');
  });
}

if (typeof document !== 'undefined' && document.readyState !== 'loading') {
  bootstrap();
} else if (typeof document !== 'undefined') {
  document.addEventListener('DOMContentLoaded', bootstrap);
}
