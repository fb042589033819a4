/** Contract tests: drive the typed client against recorded service
 * responses and assert on the exact markup a user would see. */

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, ConductClient, type SessionView } from "../src/api";
import {
  renderBanner,
  renderError,
  renderHistory,
  renderOutcomeControls,
  renderProvenance,
  renderSession,
} from "../src/render";
import { FixtureServer, type Fixtures } from "./fixture-server";
import rawFixtures from "./fixtures.json";

const fx = rawFixtures as unknown as Fixtures;
const createView = fx.create as unknown as SessionView;
const cohortViews = fx.cohorts as unknown as SessionView[];
const allViews = [createView, ...cohortViews];

function count(haystack: string, needle: string): number {
  return haystack.split(needle).length - 1;
}

describe("conduct service flow", () => {
  let server: FixtureServer;
  let client: ConductClient;

  beforeAll(async () => {
    server = new FixtureServer(fx);
    client = new ConductClient(await server.start());
  });

  afterAll(async () => {
    await server.stop();
  });

  it("replays create, each cohort submission, and export verbatim", async () => {
    const view = await client.createSession(fx.create_payload);
    expect(view).toEqual(createView);

    const seen: SessionView[] = [];
    for (const k of fx.outcomes) {
      seen.push(await client.submitCohort(view.session_id, k));
    }
    expect(seen).toEqual(cohortViews);

    expect(await client.getSession(view.session_id)).toEqual(cohortViews[2]);

    // The download must be byte-identical to the server's audit document.
    const exported = await client.exportSessionRaw(view.session_id);
    expect(exported).toBe(fx.export_raw);
    expect(JSON.parse(exported).session_id).toBe(view.session_id);
  });

  it("sends the request bodies the service expects", () => {
    const posts = server.requests.filter((r) => r.method === "POST");
    expect(posts[0].path).toBe("/sessions");
    expect(posts[0].body).toEqual(fx.create_payload);
    const sid = createView.session_id;
    expect(posts.slice(1).map((r) => r.path)).toEqual(
      fx.outcomes.map(() => `/sessions/${sid}/cohorts`),
    );
    expect(posts.slice(1).map((r) => r.body)).toEqual(
      fx.outcomes.map((k) => ({ dlt_count: k })),
    );
    const gets = server.requests.filter((r) => r.method === "GET");
    expect(gets.map((r) => r.path)).toEqual([`/sessions/${sid}`, `/sessions/${sid}/export`]);
  });

  it("surfaces validation errors with the service's detail text", async () => {
    const err = await client.createSession(fx.invalid_create_payload).then(
      () => null,
      (e: unknown) => e,
    );
    expect(err).toBeInstanceOf(ApiError);
    const apiErr = err as ApiError;
    expect(apiErr.status).toBe(422);
    expect(apiErr.code).toBe(fx.invalid_create_response.error);
    expect(apiErr.detail).toBe(fx.invalid_create_response.detail);

    const html = renderError(apiErr.detail);
    expect(html).toContain('role="alert"');
    expect(html).toContain("skeleton must be strictly increasing");
  });
});

describe("session rendering", () => {
  it("recommends exactly the dose the service assigned", () => {
    for (const view of allViews) {
      expect(renderBanner(view)).toContain(
        `Cohort ${view.cohort_index} → Dose ${view.current_dose}`,
      );
    }
  });

  it("shows the provenance panel exactly when the decision was randomized", () => {
    const flags = allViews.map((v) => v.last_decision.randomized);
    expect(flags).toEqual([false, false, false, true]);
    for (const view of allViews) {
      const html = renderSession(view);
      expect(count(html, 'data-testid="provenance"')).toBe(
        view.last_decision.randomized ? 1 : 0,
      );
    }
  });

  it("displays candidate probabilities that sum to 1.00 up to rounding", () => {
    const decision = cohortViews[2].last_decision;
    const panel = renderProvenance(decision);
    const shown = [...panel.matchAll(/dose \d+: (\d\.\d{2})/g)].map((m) => Number(m[1]));
    expect(shown).toHaveLength(decision.candidate_doses.length);
    const sum = shown.reduce((a, b) => a + b, 0);
    // each displayed value is within 0.005 of the true probability
    expect(Math.abs(sum - 1)).toBeLessThanOrEqual(0.005 * shown.length);
    expect(panel).toContain("sum 1.00");
  });

  it("marks the drawn candidate and prints the uniform draw", () => {
    const decision = cohortViews[2].last_decision;
    expect(decision.candidate_doses).toContain(decision.dose);
    expect(decision.candidate_doses).toEqual(
      [...decision.candidate_doses].sort((a, b) => a - b),
    );
    expect(decision.random_draw).toBeGreaterThanOrEqual(0);
    expect(decision.random_draw).toBeLessThan(1);

    const panel = renderProvenance(decision);
    expect(count(panel, 'class="candidate')).toBe(decision.candidate_doses.length);
    expect(count(panel, 'class="candidate drawn"')).toBe(1);
    expect(panel).toContain(`dose ${decision.dose}: `);
    expect(panel).toContain("draw 0.2508");
  });

  it("lists one history row per cohort", () => {
    for (const view of allViews) {
      const html = renderHistory(view);
      expect(count(html, "<tr data-cohort=")).toBe(view.cohorts.length);
    }
    // non-randomized rows show placeholders, the randomized row its draw
    const html = renderHistory(cohortViews[2]);
    expect(count(html, "<td>-</td>")).toBe(9);
    expect(html).toContain("<td>0.2508</td>");
    expect(html).toContain("<td>1, 2, 3, 4</td>");
  });

  it("disables outcome entry once the trial is terminal", () => {
    const completed = {
      ...cohortViews[2],
      status: "completed",
      final_mtd: 3,
      current_dose: null,
      cohort_index: null,
    } as SessionView;
    expect(renderBanner(completed)).toContain("Trial completed. Declared MTD: dose 3");
    const controls = renderOutcomeControls(completed);
    expect(controls).toContain('<select id="dlt-count" disabled>');
    expect(controls).toContain('<button id="submit-outcome" type="button" disabled>');
    expect(controls).toContain('<button id="export-session" type="button">');

    const stopped = {
      ...cohortViews[2],
      status: "stopped_overtoxic",
      p_overtoxic: 0.93,
      current_dose: null,
      cohort_index: null,
    } as SessionView;
    const banner = renderBanner(stopped);
    expect(banner).toContain("Trial stopped for overtoxicity");
    expect(banner).toContain("0.93");
    expect(renderOutcomeControls(stopped)).toContain("disabled");
  });
});
