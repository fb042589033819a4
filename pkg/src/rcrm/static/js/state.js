/** Pure form parsing and view-model helpers, kept free of DOM access so
 * the contract tests can exercise them directly. */
export const DEFAULT_FORM = {
    skeleton: "0.01, 0.05, 0.10, 0.18, 0.30, 0.50",
    target: "0.30",
    priorMean: "0",
    priorSd: "2",
    variant: "RCRM1",
    cohortSize: "3",
    maxSubjects: "45",
    pi: "0.90",
    seed: "",
};
export class FormError extends Error {
    constructor(field, message) {
        super(message);
        this.field = field;
        this.name = "FormError";
    }
}
function parseNumber(field, text) {
    const value = Number(text.trim());
    if (text.trim() === "" || !Number.isFinite(value)) {
        throw new FormError(field, `${field} must be a number`);
    }
    return value;
}
function parseInteger(field, text) {
    const value = parseNumber(field, text);
    if (!Number.isInteger(value))
        throw new FormError(field, `${field} must be an integer`);
    return value;
}
export function parseSkeleton(text) {
    const parts = text.split(",").map((p) => p.trim()).filter((p) => p.length > 0);
    if (parts.length === 0)
        throw new FormError("skeleton", "skeleton must be a comma-separated list");
    return parts.map((p) => {
        const value = Number(p);
        if (!Number.isFinite(value))
            throw new FormError("skeleton", `skeleton entry ${p} is not a number`);
        return value;
    });
}
/** Translate the form into a create-session request body. The seed field
 * is omitted when blank so the server draws one. Range rules live on the
 * server; the form only guarantees well-typed values. */
export function buildCreatePayload(values) {
    const payload = {
        skeleton: parseSkeleton(values.skeleton),
        target: parseNumber("target", values.target),
        prior_mean: parseNumber("priorMean", values.priorMean),
        prior_sd: parseNumber("priorSd", values.priorSd),
        variant: values.variant,
        cohort_size: parseInteger("cohortSize", values.cohortSize),
        max_subjects: parseInteger("maxSubjects", values.maxSubjects),
        pi: parseNumber("pi", values.pi),
    };
    if (values.seed.trim() !== "") {
        payload.seed = parseInteger("seed", values.seed);
    }
    return payload;
}
export function formatProb(p) {
    return p.toFixed(2);
}
export function formatDraw(u) {
    return u.toFixed(4);
}
/** Sum of the probabilities as displayed (after rounding); the rendered
 * panel must keep this at 1.00 up to display rounding. */
export function displayedProbSum(probs) {
    return probs.reduce((acc, p) => acc + Number(formatProb(p)), 0);
}
export function statusBanner(view) {
    switch (view.status) {
        case "completed":
            return { tone: "done", text: `Trial completed. Declared MTD: dose ${view.final_mtd}` };
        case "stopped_overtoxic":
            return {
                tone: "stop",
                text: `Trial stopped for overtoxicity. P(dose 1 toxicity > ` +
                    `${formatProb(view.config.target)}) = ${formatProb(view.p_overtoxic)}`,
            };
        default:
            return { tone: "open", text: `Cohort ${view.cohort_index} → Dose ${view.current_dose}` };
    }
}
export function isTerminal(view) {
    return view.status !== "awaiting_outcomes";
}
