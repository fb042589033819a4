/** HTML renderers: pure functions from service responses to markup, so the
 * contract tests can assert on exactly what the user sees. No numbers are
 * computed here beyond display rounding. */
import { displayedProbSum, formatDraw, formatProb, isTerminal, statusBanner } from "./state.js";
export function esc(text) {
    return String(text)
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;");
}
export function renderError(detail) {
    return `<div class="error" role="alert">${esc(detail)}</div>`;
}
export function renderBanner(view) {
    const banner = statusBanner(view);
    return `<div class="banner banner-${banner.tone}">${esc(banner.text)}</div>`;
}
export function renderProvenance(decision) {
    if (!decision.randomized)
        return "";
    const rows = decision.candidate_doses
        .map((dose, i) => {
        const drawn = dose === decision.dose ? " drawn" : "";
        return (`<li class="candidate${drawn}">dose ${dose}: ${formatProb(decision.candidate_probs[i])}` +
            (drawn ? " &#10003;" : "") +
            `</li>`);
    })
        .join("");
    const sum = displayedProbSum(decision.candidate_probs);
    return (`<section class="provenance" data-testid="provenance">` +
        `<h3>Randomized assignment</h3>` +
        `<ul>${rows}</ul>` +
        `<p>draw ${formatDraw(decision.random_draw ?? 0)}; displayed probabilities sum ${sum.toFixed(2)}</p>` +
        `</section>`);
}
export function renderPosteriorBars(view) {
    const bars = view.mtd_probs
        .map((p, i) => {
        const width = Math.max(0.5, p * 100).toFixed(1);
        return (`<div class="bar-row"><span class="bar-label">d${i + 1}</span>` +
            `<div class="bar" style="width:${width}%"></div>` +
            `<span class="bar-value">${formatProb(p)}</span></div>`);
    })
        .join("");
    return `<section class="bars"><h3>MTD probabilities</h3>${bars}</section>`;
}
export function renderToxicityCurve(view) {
    const width = 360;
    const height = 160;
    const pad = 28;
    const n = view.dose_means.length;
    const x = (i) => pad + (i * (width - 2 * pad)) / Math.max(1, n - 1);
    const y = (p) => height - pad - p * (height - 2 * pad);
    const points = view.dose_means.map((p, i) => `${x(i).toFixed(1)},${y(p).toFixed(1)}`).join(" ");
    const ty = y(view.config.target).toFixed(1);
    const labels = view.dose_means
        .map((_, i) => `<text x="${x(i).toFixed(1)}" y="${height - 8}" class="axis">d${i + 1}</text>`)
        .join("");
    return (`<section class="curve"><h3>Mean toxicity by dose</h3>` +
        `<svg viewBox="0 0 ${width} ${height}" role="img">` +
        `<line x1="${pad}" y1="${ty}" x2="${width - pad}" y2="${ty}" class="target-line"/>` +
        `<text x="${width - pad}" y="${Number(ty) - 4}" class="target-label">target ${formatProb(view.config.target)}</text>` +
        `<polyline points="${points}" class="curve-line"/>` +
        view.dose_means.map((p, i) => `<circle cx="${x(i).toFixed(1)}" cy="${y(p).toFixed(1)}" r="3"/>`).join("") +
        labels +
        `</svg></section>`);
}
export function renderHistory(view) {
    const rows = view.cohorts
        .map((c) => {
        const d = c.decision;
        const candidates = d.randomized ? d.candidate_doses.join(", ") : "-";
        const probs = d.randomized ? d.candidate_probs.map(formatProb).join(", ") : "-";
        const draw = d.randomized && d.random_draw !== null ? formatDraw(d.random_draw) : "-";
        return (`<tr data-cohort="${c.index}"><td>${c.index}</td><td>${c.dose}</td>` +
            `<td>${c.dlt_count === null ? "pending" : c.dlt_count}</td>` +
            `<td>${d.randomized ? "yes" : "no"}</td>` +
            `<td>${esc(candidates)}</td><td>${esc(probs)}</td><td>${esc(draw)}</td></tr>`);
    })
        .join("");
    return (`<section class="history"><h3>Cohort history</h3>` +
        `<table><thead><tr><th>cohort</th><th>dose</th><th>DLTs</th>` +
        `<th>randomized</th><th>candidates</th><th>probabilities</th><th>draw</th></tr></thead>` +
        `<tbody>${rows}</tbody></table></section>`);
}
export function renderOutcomeControls(view) {
    const terminal = isTerminal(view);
    const options = Array.from({ length: view.config.cohort_size + 1 }, (_, k) => {
        return `<option value="${k}">${k} of ${view.config.cohort_size}</option>`;
    }).join("");
    const disabled = terminal ? " disabled" : "";
    return (`<section class="controls">` +
        `<label for="dlt-count">DLTs observed in cohort ${terminal ? "-" : view.cohort_index}</label>` +
        `<select id="dlt-count"${disabled}>${options}</select>` +
        `<button id="submit-outcome" type="button"${disabled}>Record outcomes</button>` +
        `<button id="export-session" type="button">Download audit export</button>` +
        `</section>`);
}
export function renderSummary(view) {
    return (`<dl class="summary">` +
        `<dt>design</dt><dd>${esc(view.config.variant)}</dd>` +
        `<dt>subjects</dt><dd>${view.total_subjects} / ${view.config.max_subjects}</dd>` +
        `<dt>DLTs</dt><dd>${view.total_dlts}</dd>` +
        `<dt>P(dose 1 over target)</dt><dd>${formatProb(view.p_overtoxic)}</dd>` +
        `<dt>seed</dt><dd>${view.seed}</dd>` +
        `</dl>`);
}
export function renderSession(view) {
    return (renderBanner(view) +
        renderSummary(view) +
        renderOutcomeControls(view) +
        renderProvenance(view.last_decision) +
        renderPosteriorBars(view) +
        renderToxicityCurve(view) +
        renderHistory(view));
}
