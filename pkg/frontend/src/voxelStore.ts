/**
 * Client-side blocked-voxel state.
 *
 * Mirrors the server's guidance frames: a full frame replaces the set,
 * a diff patches it in place. A region_updated broadcast invalidates
 * the set entirely — the server always follows up with a full frame on
 * the next pose, so the store flags itself stale until that arrives.
 */
import type {
  GuidanceDiffMsg,
  GuidanceFullMsg,
  VoxelClass,
  WireVoxel,
} from "./protocol";

export interface VoxelState {
  voxelClass: VoxelClass;
  opacity: number;
}

export class VoxelStore {
  private voxels = new Map<number, VoxelState>();
  private revision = -1;
  private stale = true;

  get regionRevision(): number {
    return this.revision;
  }

  /** True between a region_updated and the next full frame. */
  get isStale(): boolean {
    return this.stale;
  }

  get size(): number {
    return this.voxels.size;
  }

  applyFull(msg: GuidanceFullMsg): void {
    this.voxels = new Map(
      msg.blocked.map(([i, cls, op]: WireVoxel) => [i, { voxelClass: cls, opacity: op }]),
    );
    this.revision = msg.region_revision;
    this.stale = false;
  }

  applyDiff(msg: GuidanceDiffMsg): void {
    if (this.stale) {
      throw new Error("diff received while awaiting a full frame resync");
    }
    if (msg.region_revision !== this.revision) {
      throw new Error(
        `diff for revision ${msg.region_revision}, store at ${this.revision}`,
      );
    }
    for (const i of msg.removed) this.voxels.delete(i);
    for (const [i, cls, op] of msg.added) {
      this.voxels.set(i, { voxelClass: cls, opacity: op });
    }
    for (const [i, op] of msg.changed_opacity) {
      const v = this.voxels.get(i);
      if (v === undefined) {
        throw new Error(`opacity change for unknown voxel ${i}`);
      }
      v.opacity = op;
    }
  }

  invalidate(): void {
    this.voxels.clear();
    this.stale = true;
  }

  get(index: number): VoxelState | undefined {
    return this.voxels.get(index);
  }

  indexSet(): Set<number> {
    return new Set(this.voxels.keys());
  }

  /** Sorted [index, class, opacity] triples — the wire shape, for tests
   * and for diffing against server frames. */
  snapshot(): WireVoxel[] {
    return [...this.voxels.entries()]
      .sort((a, b) => a[0] - b[0])
      .map(([i, v]) => [i, v.voxelClass, v.opacity]);
  }
}
