import type { CampaignSummary, ChildDoc, GenerationDoc } from "./types.js";

/** Hard ceiling on rendered repeat slots, whatever the server claims. */
export const MAX_RENDERED_REPEATS = 5;

/**
 * One display slot per required repeat, recorded values first.
 * Never returns more than MAX_RENDERED_REPEATS slots.
 */
export function repeatSlots(child: ChildDoc): (number | null)[] {
  const capacity = Math.min(child.repeats_required, MAX_RENDERED_REPEATS);
  const slots: (number | null)[] = [];
  for (let i = 0; i < capacity; i += 1) {
    const value = child.repeats[i];
    slots.push(value === undefined ? null : value);
  }
  return slots;
}

export function childComplete(child: ChildDoc): boolean {
  return child.unprintable || child.repeats.length >= child.repeats_required;
}

/** The advance control may only be live when the server says so. */
export function canAdvance(summary: CampaignSummary): boolean {
  return summary.status === "ready-to-advance";
}

export function currentGeneration(summary: CampaignSummary): GenerationDoc {
  const last = summary.generations[summary.generations.length - 1];
  if (!last) throw new Error("campaign has no generations");
  return last;
}

/**
 * Client-side force validation: finite and non-negative, else null.
 * The server enforces the same rule; this just saves a round trip.
 */
export function parseForce(raw: string): number | null {
  const trimmed = raw.trim();
  if (trimmed === "") return null;
  const value = Number(trimmed);
  if (!Number.isFinite(value) || value < 0) return null;
  return value;
}

export function formatFitness(fitness: number | null): string {
  return fitness === null ? "pending" : `${fitness.toFixed(3)} N`;
}

export function statusLabel(summary: CampaignSummary): string {
  const generation = currentGeneration(summary);
  return (
    `generation ${generation.index + 1} of ` +
    `${summary.config.max_generations}, ${summary.status}`
  );
}
