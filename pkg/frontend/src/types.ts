/** Mirrors of the campaign HTTP API payloads. */

export interface GAConfigDoc {
  population_size: number;
  max_generations: number;
  crossover_prob: number;
  allele_mutation_prob: number;
  structural_mutation_prob: number;
  mutation_sigma_fraction: number;
  seed: number | null;
}

export interface GenomeDoc {
  format_version: number;
  base_radius_mm: number;
  height_mm: number;
  control_points: [number, number][];
}

export interface ChildDoc {
  gripper_id: string;
  genome: GenomeDoc;
  parents: number[];
  unprintable: boolean;
  repeats: number[];
  repeats_required: number;
  fitness: number | null;
}

export interface GenerationDoc {
  index: number;
  complete: boolean;
  children: ChildDoc[];
}

export type CampaignStatus = "awaiting-fitness" | "ready-to-advance" | "complete";

export interface CampaignSummary {
  campaign_id: string;
  config: GAConfigDoc;
  evaluator: "manual" | "proxy";
  seed: number;
  status: CampaignStatus;
  generations: GenerationDoc[];
}

export interface ProfileDoc {
  gripper_id: string;
  base_radius_mm: number;
  height_mm: number;
  unprintable: boolean;
  /** (radius, height) rows from the base rim (R, 0) to the apex (0, h). */
  points: [number, number][];
}

export interface LineageNodeDoc {
  gripper_id: string;
  generation: number;
  child: number;
  fitness: number | null;
  unprintable: boolean;
}

export interface LineageDoc {
  nodes: LineageNodeDoc[];
  edges: [string, string][];
}

export interface ReportRow {
  generation: number;
  max_f: number;
  mean_f: number;
  best_similarity: number | null;
  mean_similarity: number | null;
}

export interface ReportDoc {
  columns: string[];
  rows: ReportRow[];
}
