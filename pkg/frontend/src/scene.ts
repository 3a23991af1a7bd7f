/**
 * Three.js workspace scene: workbench, wall, tool marker, arm skeleton,
 * and the blocked-voxel overlay, with a simple orbit-style camera.
 */
import * as THREE from "three";

import type { TaskGrid } from "./grid";
import { OverlayMesh } from "./overlay";

export interface EnvironmentBox {
  center: [number, number, number];
  half_extents: [number, number, number];
}

export class WorkspaceScene {
  readonly scene = new THREE.Scene();
  readonly camera: THREE.PerspectiveCamera;
  readonly overlay: OverlayMesh;
  readonly toolMarker: THREE.Group;
  private armLine: THREE.Line;

  constructor(grid: TaskGrid, aspect: number) {
    this.scene.background = new THREE.Color(0x10141a);
    this.camera = new THREE.PerspectiveCamera(50, aspect, 0.01, 20);
    this.camera.up.set(0, 0, 1); // robot convention: z up
    this.camera.position.set(1.6, -1.2, 1.0);
    this.camera.lookAt(0.5, 0, 0.1);

    const ambient = new THREE.AmbientLight(0xffffff, 0.7);
    const sun = new THREE.DirectionalLight(0xffffff, 1.2);
    sun.position.set(1, -2, 3);
    this.scene.add(ambient, sun);

    this.overlay = new OverlayMesh(grid, 0.8 * grid.spec.spacing);
    this.scene.add(this.overlay.mesh);

    this.toolMarker = buildToolMarker();
    this.scene.add(this.toolMarker);

    this.armLine = new THREE.Line(
      new THREE.BufferGeometry(),
      new THREE.LineBasicMaterial({ color: 0x4fc3f7, linewidth: 2 }),
    );
    this.scene.add(this.armLine);
  }

  addBoxes(boxes: EnvironmentBox[]): void {
    for (const b of boxes) {
      const mesh = new THREE.Mesh(
        new THREE.BoxGeometry(
          2 * b.half_extents[0],
          2 * b.half_extents[1],
          2 * b.half_extents[2],
        ),
        new THREE.MeshStandardMaterial({ color: 0x4a5568, roughness: 0.9 }),
      );
      mesh.position.set(b.center[0], b.center[1], b.center[2]);
      this.scene.add(mesh);
    }
  }

  setToolPose(p: [number, number, number], q: [number, number, number, number]): void {
    this.toolMarker.position.set(p[0], p[1], p[2]);
    // three.js quaternions are (x, y, z, w); the protocol sends (w, x, y, z)
    this.toolMarker.quaternion.set(q[1], q[2], q[3], q[0]);
  }

  setArmSkeleton(points: [number, number, number][]): void {
    const flat = new Float32Array(points.flat());
    this.armLine.geometry.setAttribute("position", new THREE.BufferAttribute(flat, 3));
    this.armLine.geometry.attributes.position.needsUpdate = true;
    this.armLine.geometry.computeBoundingSphere();
  }
}

function buildToolMarker(): THREE.Group {
  const group = new THREE.Group();
  const shaft = new THREE.Mesh(
    new THREE.CylinderGeometry(0.008, 0.008, 0.12, 12),
    new THREE.MeshStandardMaterial({ color: 0x81c784 }),
  );
  // cylinder axis is y in three.js; the tool forward axis is z
  shaft.rotation.x = Math.PI / 2;
  shaft.position.z = -0.06;
  const tip = new THREE.Mesh(
    new THREE.SphereGeometry(0.012, 12, 12),
    new THREE.MeshStandardMaterial({ color: 0xfff176 }),
  );
  group.add(shaft, tip);
  return group;
}
