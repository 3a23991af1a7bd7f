/**
 * Reproduction playback: animates the arm skeleton through the
 * fk_points of a pipeline result. Frame selection is a pure function
 * of elapsed time so the playback clock is testable.
 */
import type { PipelineResultMsg } from "./protocol";

export interface Playback {
  /** sample timestamps (seconds, starting at 0) */
  times: number[];
  /** per sample: polyline of world points base..tool tip */
  frames: [number, number, number][][];
}

export function toPlayback(result: PipelineResultMsg): Playback {
  return {
    times: result.trajectory.map((s) => s.t),
    frames: result.fk_points,
  };
}

/**
 * Index of the frame to show at `elapsed` seconds: the last sample at
 * or before the clock, clamped to the final frame.
 */
export function frameIndexAt(playback: Playback, elapsed: number): number {
  const { times } = playback;
  if (elapsed <= times[0]) return 0;
  let lo = 0;
  let hi = times.length - 1;
  while (lo < hi) {
    const mid = (lo + hi + 1) >> 1;
    if (times[mid] <= elapsed) lo = mid;
    else hi = mid - 1;
  }
  return lo;
}

export function duration(playback: Playback): number {
  return playback.times[playback.times.length - 1];
}
