// Runtime validation of every payload the session service emits.
// The UI never renders a number that did not pass through one of these.

import { z } from "zod";

const finite = z.number().finite();

export const ProblemEntry = z.object({
  id: z.string(),
  d: z.number().int().positive(),
  m: z.number().int().min(2),
  objective_names: z.array(z.string()),
  orientations: z.array(z.enum(["min", "max"])),
  default_utility: z.string(),
});

export const ProblemsDoc = z.object({
  schema_version: z.literal(1),
  problems: z.array(ProblemEntry),
});

export const CreatedDoc = z.object({
  id: z.string(),
  status: z.string(),
});

export const Progress = z.object({
  interaction: z.number().int().nonnegative(),
  budget: z.number().int().nonnegative(),
  initial_remaining: z.number().int().nonnegative().optional(),
  initial_total: z.number().int().nonnegative().optional(),
});

export const StateDoc = z.object({
  schema_version: z.literal(1),
  id: z.string(),
  status: z.string(),
  busy: z.boolean(),
  error: z.string().nullable(),
  problem: z.string(),
  variant: z.string(),
  dm_mode: z.string(),
  progress: Progress,
  has_pending_query: z.boolean(),
  menu_ready: z.boolean(),
});

export const QueryOption = z.object({
  objectives: z.array(finite),
  decision: z.array(finite).optional(),
});

export const QueryDoc = z.object({
  schema_version: z.literal(1),
  seq: z.number().int().nonnegative(),
  origin: z.enum(["initial", "elicited"]),
  objective_names: z.array(z.string()),
  orientations: z.array(z.enum(["min", "max"])),
  options: z.tuple([QueryOption, QueryOption]),
  progress: Progress,
});

export const ResponseAck = z.object({
  accepted: z.literal(true),
  seq: z.number().int().nonnegative(),
  status: z.string(),
  progress: Progress.pick({ interaction: true, budget: true }),
});

export const MenuDoc = z.object({
  schema_version: z.literal(1),
  k: z.number().int().positive(),
  construction: z.enum(["greedy", "joint-enumeration"]),
  expected_best_utility: finite,
  prefix_values: z.array(finite),
  decisions: z.array(z.array(finite)),
  inputs: z.array(z.array(finite)),
  item_means: z.array(finite),
  item_variances: z.array(z.number()),
  indices: z.array(z.number().int()),
  objectives: z.array(z.array(finite)),
  objective_names: z.array(z.string()),
  orientations: z.array(z.enum(["min", "max"])),
});

export const ErrorDoc = z.object({
  error: z.string(),
});

export type ProblemEntryT = z.infer<typeof ProblemEntry>;
export type StateDocT = z.infer<typeof StateDoc>;
export type QueryDocT = z.infer<typeof QueryDoc>;
export type MenuDocT = z.infer<typeof MenuDoc>;
export type ResponseAckT = z.infer<typeof ResponseAck>;
