/**
 * Tool steering: keyboard moves the demonstrated tool through the
 * workspace, Q/E toggles between the grid's orientation-set entries.
 * Pure state + a thin DOM binding so the stepping logic is testable.
 */
import type { Quat, TaskGrid, Vec3 } from "./grid";

export interface ToolState {
  position: Vec3;
  orientationIndex: number;
}

const KEY_STEPS: Record<string, Vec3> = {
  ArrowUp: [1, 0, 0],
  ArrowDown: [-1, 0, 0],
  ArrowLeft: [0, 1, 0],
  ArrowRight: [0, -1, 0],
  PageUp: [0, 0, 1],
  PageDown: [0, 0, -1],
};

export function stepTool(
  state: ToolState,
  key: string,
  grid: TaskGrid,
  stepSize: number,
): ToolState {
  if (key === "KeyQ" || key === "KeyE") {
    const n = grid.nOrientations;
    const delta = key === "KeyQ" ? -1 : 1;
    return {
      position: state.position,
      orientationIndex: (state.orientationIndex + delta + n) % n,
    };
  }
  const dir = KEY_STEPS[key];
  if (dir === undefined) return state;
  const [lo, hi] = grid.spec.bounds;
  const margin = 2 * grid.spec.spacing;
  const next = state.position.map((v, k) =>
    Math.min(hi[k] + margin, Math.max(lo[k] - margin, v + dir[k] * stepSize)),
  ) as Vec3;
  return { position: next, orientationIndex: state.orientationIndex };
}

export function toolQuat(state: ToolState, grid: TaskGrid): Quat {
  return grid.orientationSet[state.orientationIndex];
}

export function centerTool(grid: TaskGrid): ToolState {
  const [lo, hi] = grid.spec.bounds;
  return {
    position: [0, 1, 2].map((k) => (lo[k] + hi[k]) / 2) as Vec3,
    orientationIndex: 0,
  };
}
