/** DOM wiring: reads the create form, drives the client, and swaps the
 * rendered session view into the page. All markup comes from render.ts. */
import { ApiError, ConductClient } from "./api.js";
import { renderError, renderSession } from "./render.js";
import { buildCreatePayload, DEFAULT_FORM, FormError } from "./state.js";
const client = new ConductClient("");
let view = null;
function el(id) {
    const node = document.getElementById(id);
    if (!node)
        throw new Error(`missing element #${id}`);
    return node;
}
function readForm() {
    return {
        skeleton: el("f-skeleton").value,
        target: el("f-target").value,
        priorMean: el("f-prior-mean").value,
        priorSd: el("f-prior-sd").value,
        variant: el("f-variant").value,
        cohortSize: el("f-cohort-size").value,
        maxSubjects: el("f-max-subjects").value,
        pi: el("f-pi").value,
        seed: el("f-seed").value,
    };
}
function fillForm(values) {
    el("f-skeleton").value = values.skeleton;
    el("f-target").value = values.target;
    el("f-prior-mean").value = values.priorMean;
    el("f-prior-sd").value = values.priorSd;
    el("f-variant").value = values.variant;
    el("f-cohort-size").value = values.cohortSize;
    el("f-max-subjects").value = values.maxSubjects;
    el("f-pi").value = values.pi;
    el("f-seed").value = values.seed;
}
function showFormError(message) {
    el("form-error").innerHTML = renderError(message);
}
function showSessionError(message) {
    el("session-error").innerHTML = renderError(message);
}
function showView(next) {
    view = next;
    el("create-section").hidden = true;
    el("session-section").hidden = false;
    el("session-error").innerHTML = "";
    el("session-body").innerHTML = renderSession(next);
}
function errorText(err) {
    if (err instanceof ApiError || err instanceof FormError)
        return err.message;
    return String(err);
}
async function onCreate(event) {
    event.preventDefault();
    el("form-error").innerHTML = "";
    try {
        const payload = buildCreatePayload(readForm());
        showView(await client.createSession(payload));
    }
    catch (err) {
        showFormError(errorText(err));
    }
}
async function onSubmitOutcome() {
    if (!view)
        return;
    const count = Number(el("dlt-count").value);
    try {
        showView(await client.submitCohort(view.session_id, count));
    }
    catch (err) {
        showSessionError(errorText(err));
    }
}
async function onExport() {
    if (!view)
        return;
    try {
        const raw = await client.exportSessionRaw(view.session_id);
        const url = URL.createObjectURL(new Blob([raw], { type: "application/json" }));
        const anchor = document.createElement("a");
        anchor.href = url;
        anchor.download = `session-${view.session_id}.json`;
        anchor.click();
        URL.revokeObjectURL(url);
    }
    catch (err) {
        showSessionError(errorText(err));
    }
}
function main() {
    fillForm(DEFAULT_FORM);
    el("create-form").addEventListener("submit", (e) => void onCreate(e));
    // delegated: the session body is re-rendered after every response
    el("session-section").addEventListener("click", (e) => {
        const target = e.target;
        if (target.id === "submit-outcome")
            void onSubmitOutcome();
        if (target.id === "export-session")
            void onExport();
    });
}
document.addEventListener("DOMContentLoaded", main);
