/**
 * Pure HTML renderers: state in, markup out.
 *
 * Ranks, scores, and ordering come verbatim from the service response;
 * nothing is recomputed client-side.
 */

import type { RecommendResponse } from "./api.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderError(message: string | null): string {
  if (!message) return "";
  return `<div class="banner error" role="alert">${escapeHtml(message)}</div>`;
}

export function renderFallbackBanner(response: RecommendResponse | null): string {
  if (!response?.fallback_used) return "";
  return `<div class="banner fallback">No similar declarations found; showing the corpus-popularity fallback.</div>`;
}

export function renderApis(response: RecommendResponse | null): string {
  if (!response) return `<p class="hint">Submit a context to see recommendations.</p>`;
  if (response.apis.length === 0) {
    return `<p class="hint">No recommendations for this context.</p>`;
  }
  const rows = response.apis
    .map(
      (item) => `
      <tr>
        <td class="rank">${item.rank}</td>
        <td><button type="button" class="invocation" data-invocation="${escapeHtml(
          item.invocation,
        )}" title="Append to the active declaration and resubmit">${escapeHtml(
          item.invocation,
        )}</button></td>
        <td class="score">${item.score.toFixed(6)}</td>
      </tr>`,
    )
    .join("");
  return `
    <table class="apis">
      <thead><tr><th>#</th><th>invocation</th><th>score</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>
    <p class="hint">Click an invocation to append it to the active declaration and resubmit.</p>`;
}

export function renderSnippets(response: RecommendResponse | null): string {
  if (!response || response.snippets.length === 0) return "";
  const blocks = response.snippets
    .map((snippet) => {
      const content = snippet.body
        ? `<pre class="body">${escapeHtml(snippet.body)}</pre>`
        : `<ol class="sequence">${snippet.sequence
            .map((s) => `<li>${escapeHtml(s)}</li>`)
            .join("")}</ol>`;
      return `
      <article class="snippet">
        <header>
          <span class="provenance">${escapeHtml(snippet.project)} :: ${escapeHtml(
            snippet.declaration,
          )}</span>
          <span class="score">jaccard ${snippet.score.toFixed(4)}</span>
        </header>
        ${content}
      </article>`;
    })
    .join("");
  return `<section class="snippets"><h2>Snippets</h2>${blocks}</section>`;
}

export function renderStatus(response: RecommendResponse | null, inFlight: boolean): string {
  if (inFlight) return `<span class="status busy">querying…</span>`;
  if (!response) return "";
  return `<span class="status">${response.apis.length} items in ${response.elapsed_ms.toFixed(
    1,
  )} ms</span>`;
}

export function renderResults(response: RecommendResponse | null, inFlight: boolean, error: string | null): string {
  return [
    renderError(error),
    renderFallbackBanner(response),
    renderStatus(response, inFlight),
    renderApis(response),
    renderSnippets(response),
  ].join("\n");
}
