/**
 * Blocked-voxel overlay: maps store state to renderable instances.
 *
 * The instance computation is a pure function so the mapping (index ->
 * lattice position, class -> color, opacity -> alpha) is testable
 * without a WebGL context; OverlayMesh just pushes the result into a
 * three.js InstancedMesh.
 */
import * as THREE from "three";

import type { TaskGrid, Vec3 } from "./grid";
import type { VoxelClass } from "./protocol";
import type { VoxelStore } from "./voxelStore";

export const CLASS_COLORS: Record<VoxelClass, [number, number, number]> = {
  collision_all_ik: [0.85, 0.1, 0.1], // red: every IK branch collides
  large_config_change: [0.95, 0.55, 0.05], // orange: reachable, far in joint space
  unreachable: [0.45, 0.45, 0.45], // gray: no IK at all
};

export interface VoxelInstance {
  index: number;
  position: Vec3;
  color: [number, number, number];
  opacity: number;
}

export function computeInstances(store: VoxelStore, grid: TaskGrid): VoxelInstance[] {
  const out: VoxelInstance[] = [];
  for (const [index, cls, opacity] of store.snapshot()) {
    out.push({
      index,
      position: grid.position(index),
      color: CLASS_COLORS[cls],
      opacity,
    });
  }
  return out;
}

export class OverlayMesh {
  readonly mesh: THREE.InstancedMesh;
  private readonly maxInstances: number;

  constructor(grid: TaskGrid, voxelSize: number) {
    this.maxInstances = grid.nPoses;
    const geometry = new THREE.BoxGeometry(voxelSize, voxelSize, voxelSize);
    const material = new THREE.MeshBasicMaterial({
      transparent: true,
      opacity: 0.55,
      depthWrite: false,
    });
    this.mesh = new THREE.InstancedMesh(geometry, material, this.maxInstances);
    this.mesh.instanceMatrix.setUsage(THREE.DynamicDrawUsage);
    this.mesh.count = 0;
  }

  update(store: VoxelStore, grid: TaskGrid): void {
    const instances = computeInstances(store, grid);
    const m = new THREE.Matrix4();
    const color = new THREE.Color();
    instances.forEach((inst, slot) => {
      m.makeTranslation(inst.position[0], inst.position[1], inst.position[2]);
      this.mesh.setMatrixAt(slot, m);
      // instanced alpha is not supported by the basic material, so the
      // per-voxel opacity modulates the color toward the background
      color.setRGB(
        inst.color[0] * inst.opacity,
        inst.color[1] * inst.opacity,
        inst.color[2] * inst.opacity,
      );
      this.mesh.setColorAt(slot, color);
    });
    this.mesh.count = instances.length;
    this.mesh.instanceMatrix.needsUpdate = true;
    if (this.mesh.instanceColor) this.mesh.instanceColor.needsUpdate = true;
  }
}
