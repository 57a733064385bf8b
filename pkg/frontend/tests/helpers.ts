import type {
  CampaignSummary,
  ChildDoc,
  GenerationDoc,
  ProfileDoc,
} from "../src/types.js";

export function makeChild(over: Partial<ChildDoc> = {}): ChildDoc {
  return {
    gripper_id: "g0c0-stub",
    genome: {
      format_version: 1,
      base_radius_mm: 30.0,
      height_mm: 40.0,
      control_points: [
        [0.9, 0.3],
        [0.5, 0.8],
      ],
    },
    parents: [],
    unprintable: false,
    repeats: [],
    repeats_required: 5,
    fitness: null,
    ...over,
  };
}

export function makeGeneration(
  children: ChildDoc[],
  index = 0,
  complete = false,
): GenerationDoc {
  return { index, complete, children };
}

export function makeSummary(
  generations: GenerationDoc[],
  over: Partial<CampaignSummary> = {},
): CampaignSummary {
  return {
    campaign_id: "stub-campaign",
    config: {
      population_size: generations[0]?.children.length ?? 5,
      max_generations: 10,
      crossover_prob: 0.8,
      allele_mutation_prob: 0.2,
      structural_mutation_prob: 0.25,
      mutation_sigma_fraction: 0.1,
      seed: 7,
    },
    evaluator: "manual",
    seed: 7,
    status: "awaiting-fitness",
    generations,
    ...over,
  };
}

export function makeProfile(over: Partial<ProfileDoc> = {}): ProfileDoc {
  return {
    gripper_id: "g0c0-stub",
    base_radius_mm: 30.0,
    height_mm: 40.0,
    unprintable: false,
    points: [
      [30, 0],
      [15, 20],
      [0, 40],
    ],
    ...over,
  };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function textResponse(body: string, status = 200): Response {
  return new Response(body, {
    status,
    headers: { "Content-Type": "text/csv" },
  });
}
