/** DOM wiring: reads the create form, drives the client, and swaps the
 * rendered session view into the page. All markup comes from render.ts. */

import { ApiError, ConductClient, SessionView } from "./api.js";
import { renderError, renderSession } from "./render.js";
import { buildCreatePayload, CreateFormValues, DEFAULT_FORM, FormError } from "./state.js";

const client = new ConductClient("");

let view: SessionView | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function readForm(): CreateFormValues {
  return {
    skeleton: el<HTMLInputElement>("f-skeleton").value,
    target: el<HTMLInputElement>("f-target").value,
    priorMean: el<HTMLInputElement>("f-prior-mean").value,
    priorSd: el<HTMLInputElement>("f-prior-sd").value,
    variant: el<HTMLSelectElement>("f-variant").value,
    cohortSize: el<HTMLInputElement>("f-cohort-size").value,
    maxSubjects: el<HTMLInputElement>("f-max-subjects").value,
    pi: el<HTMLInputElement>("f-pi").value,
    seed: el<HTMLInputElement>("f-seed").value,
  };
}

function fillForm(values: CreateFormValues): void {
  el<HTMLInputElement>("f-skeleton").value = values.skeleton;
  el<HTMLInputElement>("f-target").value = values.target;
  el<HTMLInputElement>("f-prior-mean").value = values.priorMean;
  el<HTMLInputElement>("f-prior-sd").value = values.priorSd;
  el<HTMLSelectElement>("f-variant").value = values.variant;
  el<HTMLInputElement>("f-cohort-size").value = values.cohortSize;
  el<HTMLInputElement>("f-max-subjects").value = values.maxSubjects;
  el<HTMLInputElement>("f-pi").value = values.pi;
  el<HTMLInputElement>("f-seed").value = values.seed;
}

function showFormError(message: string): void {
  el("form-error").innerHTML = renderError(message);
}

function showSessionError(message: string): void {
  el("session-error").innerHTML = renderError(message);
}

function showView(next: SessionView): void {
  view = next;
  el("create-section").hidden = true;
  el("session-section").hidden = false;
  el("session-error").innerHTML = "";
  el("session-body").innerHTML = renderSession(next);
}

function errorText(err: unknown): string {
  if (err instanceof ApiError || err instanceof FormError) return err.message;
  return String(err);
}

async function onCreate(event: Event): Promise<void> {
  event.preventDefault();
  el("form-error").innerHTML = "";
  try {
    const payload = buildCreatePayload(readForm());
    showView(await client.createSession(payload));
  } catch (err) {
    showFormError(errorText(err));
  }
}

async function onSubmitOutcome(): Promise<void> {
  if (!view) return;
  const count = Number(el<HTMLSelectElement>("dlt-count").value);
  try {
    showView(await client.submitCohort(view.session_id, count));
  } catch (err) {
    showSessionError(errorText(err));
  }
}

async function onExport(): Promise<void> {
  if (!view) return;
  try {
    const raw = await client.exportSessionRaw(view.session_id);
    const url = URL.createObjectURL(new Blob([raw], { type: "application/json" }));
    const anchor = document.createElement("a");
    anchor.href = url;
    anchor.download = `session-${view.session_id}.json`;
    anchor.click();
    URL.revokeObjectURL(url);
  } catch (err) {
    showSessionError(errorText(err));
  }
}

function main(): void {
  fillForm(DEFAULT_FORM);
  el<HTMLFormElement>("create-form").addEventListener("submit", (e) => void onCreate(e));
  // delegated: the session body is re-rendered after every response
  el("session-section").addEventListener("click", (e) => {
    const target = e.target as HTMLElement;
    if (target.id === "submit-outcome") void onSubmitOutcome();
    if (target.id === "export-session") void onExport();
  });
}

document.addEventListener("DOMContentLoaded", main);
