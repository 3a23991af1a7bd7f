/**
 * App assembly: connects to the session server, renders the workspace,
 * streams the steered tool pose, and drives record / run controls.
 */
import * as THREE from "three";

import { SessionClient, type SocketLike } from "./client";
import { centerTool, stepTool, toolQuat, type ToolState } from "./controls";
import { TaskGrid, type GridSpec } from "./grid";
import { frameIndexAt, toPlayback, type Playback } from "./robot";
import { WorkspaceScene, type EnvironmentBox } from "./scene";

const POSE_INTERVAL_MS = 1000 / 60;

async function fetchJson<T>(url: string): Promise<T> {
  const res = await fetch(url);
  if (!res.ok) throw new Error(`${url}: ${res.status}`);
  return res.json() as Promise<T>;
}

function statusLine(text: string, isError = false): void {
  const el = document.getElementById("status");
  if (el) {
    el.textContent = text;
    el.className = isError ? "error" : "";
  }
}

async function start(): Promise<void> {
  const spec = await fetchJson<GridSpec>("wall_grid.json");
  const envFile = await fetchJson<{ static_shapes: EnvironmentBox[] }>("wall_env.json");
  const grid = new TaskGrid(spec);

  const canvas = document.getElementById("view") as HTMLCanvasElement;
  const renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
  renderer.setSize(window.innerWidth, window.innerHeight);
  const workspace = new WorkspaceScene(grid, window.innerWidth / window.innerHeight);
  workspace.addBoxes(envFile.static_shapes);

  const ws = new WebSocket(`ws://${location.host}/ws`);
  await new Promise<void>((resolve, reject) => {
    ws.onopen = () => resolve();
    ws.onerror = () => reject(new Error("websocket connect failed"));
  });
  const socket: SocketLike = { send: (data) => ws.send(data), onmessage: null };
  ws.onmessage = (ev) => socket.onmessage?.({ data: String(ev.data) });
  const client = new SessionClient(socket);

  let tool: ToolState = centerTool(grid);
  let recording = false;
  let playback: Playback | null = null;
  let playbackStart = 0;
  const t0 = performance.now();

  client.onMessage((msg) => {
    switch (msg.type) {
      case "record_started":
        recording = true;
        statusLine("recording…");
        break;
      case "demo_stored":
        recording = false;
        statusLine(`demo "${msg.name}" stored (${msg.samples} samples)`);
        break;
      case "region_updated":
        statusLine(`region updated: ${msg.removed_pose_count} poses dropped`);
        break;
      case "pipeline_result":
        if (msg.report.success) {
          playback = toPlayback(msg);
          playbackStart = performance.now();
          statusLine(`reproducing "${msg.name}" — max jump ${msg.report.max_joint_jump.toFixed(3)} rad`);
        } else {
          statusLine(
            `reproduction failed: ${msg.report.out_of_region_samples.length} samples out of region`,
            true,
          );
        }
        break;
      case "error":
        recording = msg.code === "region_changed" ? false : recording;
        statusLine(
          msg.sample_indices
            ? `${msg.message} (samples ${msg.sample_indices.join(", ")})`
            : msg.message,
          true,
        );
        break;
    }
  });

  window.addEventListener("keydown", (ev) => {
    if (ev.code === "KeyR") {
      client.send(recording ? { type: "record_stop", name: `demo-${Date.now()}` } : { type: "record_start" });
      return;
    }
    if (ev.code === "Enter") {
      const name = prompt("demo name to reproduce");
      if (name) client.send({ type: "run_pipeline", demo: name });
      return;
    }
    tool = stepTool(tool, ev.code, grid, 0.01);
  });

  window.setInterval(() => {
    const t = (performance.now() - t0) / 1000;
    client.sendPose([...tool.position], [...toolQuat(tool, grid)], t);
  }, POSE_INTERVAL_MS);

  function render(): void {
    workspace.setToolPose(tool.position, toolQuat(tool, grid));
    workspace.overlay.update(client.store, grid);
    if (playback) {
      const elapsed = (performance.now() - playbackStart) / 1000;
      const frame = playback.frames[frameIndexAt(playback, elapsed)];
      workspace.setArmSkeleton(frame);
    }
    renderer.render(workspace.scene, workspace.camera);
    requestAnimationFrame(render);
  }
  render();
}

start().catch((err) => statusLine(String(err), true));
