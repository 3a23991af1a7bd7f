/**
 * Wire types for the newline-delimited JSON session protocol.
 *
 * Every server message carries a `type` discriminator; the guards below
 * narrow unknown JSON to the matching interface and reject anything
 * structurally off, so transport bugs surface at the boundary.
 */

export type VoxelClass = "collision_all_ik" | "large_config_change" | "unreachable";

/** [poseIndex, class, opacity] triple as sent on the wire. */
export type WireVoxel = [number, VoxelClass, number];

export interface WirePose {
  p: [number, number, number];
  q: [number, number, number, number];
}

export interface ToolStamp {
  pose: WirePose;
  t: number;
}

export interface GuidanceFullMsg {
  type: "guidance_full";
  blocked: WireVoxel[];
  tool: ToolStamp;
  region_revision: number;
}

export interface GuidanceDiffMsg {
  type: "guidance_diff";
  added: WireVoxel[];
  removed: number[];
  changed_opacity: [number, number][];
  tool: ToolStamp;
  region_revision: number;
}

export interface RegionUpdatedMsg {
  type: "region_updated";
  removed_pose_count: number;
  env_revision: number;
}

export interface DemoStoredMsg {
  type: "demo_stored";
  name: string;
  samples: number;
}

export interface ReproductionReport {
  success: boolean;
  max_joint_jump: number;
  out_of_region_samples: number[];
  collision_samples: number[];
  unreachable_samples: number[];
}

export interface PipelineResultMsg {
  type: "pipeline_result";
  name: string;
  trajectory: { t: number; config: number[] }[];
  report: ReproductionReport;
  /** per trajectory sample: world positions of frames base..tool tip */
  fk_points: [number, number, number][][];
}

export interface RegionMsg {
  type: "region";
  graph_ref: string;
  epsilon: number;
  env_revision: number;
  mapping: { pose_index: number; config: number[] }[];
  total_path_cost: number;
}

export interface ErrorMsg {
  type: "error";
  code: string;
  message: string;
  sample_indices?: number[];
}

export interface RecordStartedMsg {
  type: "record_started";
}

export type ServerMessage =
  | GuidanceFullMsg
  | GuidanceDiffMsg
  | RegionUpdatedMsg
  | DemoStoredMsg
  | PipelineResultMsg
  | RegionMsg
  | ErrorMsg
  | RecordStartedMsg;

export type ClientMessage =
  | { type: "pose"; p: number[]; q: number[]; t: number }
  | { type: "record_start" }
  | { type: "record_stop"; name: string }
  | { type: "run_pipeline"; demo: string; goal?: WirePose; tau?: number }
  | { type: "add_object"; id: string; shape: Record<string, unknown> }
  | { type: "remove_object"; id: string }
  | { type: "get_region" }
  | { type: "get_frame_full" };

const VOXEL_CLASSES = new Set(["collision_all_ik", "large_config_change", "unreachable"]);

function isWireVoxel(v: unknown): v is WireVoxel {
  return (
    Array.isArray(v) &&
    v.length === 3 &&
    typeof v[0] === "number" &&
    VOXEL_CLASSES.has(v[1] as string) &&
    typeof v[2] === "number"
  );
}

function isToolStamp(v: unknown): v is ToolStamp {
  if (typeof v !== "object" || v === null) return false;
  const t = v as ToolStamp;
  return (
    typeof t.t === "number" &&
    typeof t.pose === "object" &&
    Array.isArray(t.pose.p) &&
    t.pose.p.length === 3 &&
    Array.isArray(t.pose.q) &&
    t.pose.q.length === 4
  );
}

export function isGuidanceFull(m: unknown): m is GuidanceFullMsg {
  const g = m as GuidanceFullMsg;
  return (
    typeof m === "object" &&
    m !== null &&
    g.type === "guidance_full" &&
    Array.isArray(g.blocked) &&
    g.blocked.every(isWireVoxel) &&
    isToolStamp(g.tool) &&
    typeof g.region_revision === "number"
  );
}

export function isGuidanceDiff(m: unknown): m is GuidanceDiffMsg {
  const g = m as GuidanceDiffMsg;
  return (
    typeof m === "object" &&
    m !== null &&
    g.type === "guidance_diff" &&
    Array.isArray(g.added) &&
    g.added.every(isWireVoxel) &&
    Array.isArray(g.removed) &&
    g.removed.every((i) => typeof i === "number") &&
    Array.isArray(g.changed_opacity) &&
    g.changed_opacity.every((c) => Array.isArray(c) && c.length === 2) &&
    isToolStamp(g.tool) &&
    typeof g.region_revision === "number"
  );
}

export function isRegionUpdated(m: unknown): m is RegionUpdatedMsg {
  const g = m as RegionUpdatedMsg;
  return (
    typeof m === "object" &&
    m !== null &&
    g.type === "region_updated" &&
    typeof g.removed_pose_count === "number" &&
    typeof g.env_revision === "number"
  );
}

export function isPipelineResult(m: unknown): m is PipelineResultMsg {
  const g = m as PipelineResultMsg;
  return (
    typeof m === "object" &&
    m !== null &&
    g.type === "pipeline_result" &&
    Array.isArray(g.trajectory) &&
    Array.isArray(g.fk_points) &&
    typeof g.report === "object" &&
    typeof g.report.success === "boolean"
  );
}

export function isErrorMsg(m: unknown): m is ErrorMsg {
  const g = m as ErrorMsg;
  return (
    typeof m === "object" &&
    m !== null &&
    g.type === "error" &&
    typeof g.code === "string" &&
    typeof g.message === "string"
  );
}

/** Parse one NDJSON line into a ServerMessage, or null if unusable. */
export function parseServerMessage(line: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const type = (raw as { type?: unknown }).type;
  switch (type) {
    case "guidance_full":
      return isGuidanceFull(raw) ? raw : null;
    case "guidance_diff":
      return isGuidanceDiff(raw) ? raw : null;
    case "region_updated":
      return isRegionUpdated(raw) ? raw : null;
    case "pipeline_result":
      return isPipelineResult(raw) ? raw : null;
    case "error":
      return isErrorMsg(raw) ? raw : null;
    case "demo_stored":
    case "region":
    case "record_started":
      return raw as ServerMessage;
    default:
      return null;
  }
}
