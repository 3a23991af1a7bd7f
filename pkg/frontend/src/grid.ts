/**
 * Client-side mirror of the server's task-space lattice.
 *
 * Pose index = positionIndex * nOrientations + orientationIndex, with
 * positions enumerated x-major, then y, then z. Reproducing the same
 * arithmetic here lets the overlay place voxels without ever shipping
 * the full pose list over the wire.
 */

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number]; // w, x, y, z

export interface GridSpec {
  bounds: [Vec3, Vec3];
  spacing: number;
  nominal_orientation: Quat;
  orientation_offsets: Quat[];
  ball_radius: number;
}

export function quatMul(a: Quat, b: Quat): Quat {
  const [aw, ax, ay, az] = a;
  const [bw, bx, by, bz] = b;
  return [
    aw * bw - ax * bx - ay * by - az * bz,
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
  ];
}

export function quatNormalize(q: Quat): Quat {
  const n = Math.hypot(q[0], q[1], q[2], q[3]);
  return [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
}

/** Rotate a vector by a unit quaternion. */
export function quatRotate(q: Quat, v: Vec3): Vec3 {
  const [w, x, y, z] = q;
  // t = 2 * (q_vec x v); v' = v + w*t + q_vec x t
  const tx = 2 * (y * v[2] - z * v[1]);
  const ty = 2 * (z * v[0] - x * v[2]);
  const tz = 2 * (x * v[1] - y * v[0]);
  return [
    v[0] + w * tx + y * tz - z * ty,
    v[1] + w * ty + z * tx - x * tz,
    v[2] + w * tz + x * ty - y * tx,
  ];
}

export class TaskGrid {
  readonly counts: [number, number, number];
  readonly nPositions: number;
  readonly orientationSet: Quat[];

  constructor(readonly spec: GridSpec) {
    const [lo, hi] = spec.bounds;
    this.counts = [0, 1, 2].map(
      (k) => Math.floor((hi[k] - lo[k]) / spec.spacing + 1e-9) + 1,
    ) as [number, number, number];
    this.nPositions = this.counts[0] * this.counts[1] * this.counts[2];
    const nominal = quatNormalize(spec.nominal_orientation);
    this.orientationSet = [
      nominal,
      ...spec.orientation_offsets.map((o) => quatNormalize(quatMul(o, nominal))),
    ];
  }

  get nOrientations(): number {
    return this.orientationSet.length;
  }

  get nPoses(): number {
    return this.nPositions * this.nOrientations;
  }

  orientationIndex(poseIndex: number): number {
    return poseIndex % this.nOrientations;
  }

  position(poseIndex: number): Vec3 {
    const m = Math.floor(poseIndex / this.nOrientations);
    const [, ny, nz] = [this.counts[0], this.counts[1], this.counts[2]];
    const iz = m % nz;
    const iy = Math.floor(m / nz) % ny;
    const ix = Math.floor(m / (nz * ny));
    const lo = this.spec.bounds[0];
    const s = this.spec.spacing;
    return [lo[0] + ix * s, lo[1] + iy * s, lo[2] + iz * s];
  }

  orientation(poseIndex: number): Quat {
    return this.orientationSet[this.orientationIndex(poseIndex)];
  }

  /** Tool-frame z-axis of a pose, in world coordinates. */
  forwardAxis(poseIndex: number): Vec3 {
    return quatRotate(this.orientation(poseIndex), [0, 0, 1]);
  }
}
