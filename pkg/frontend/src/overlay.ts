// Skeleton overlay geometry. Pure: turns a frame message into drawable
// segments/points so the canvas code stays a dumb painter and the
// rules (bones only between mutually visible joints, role colors,
// empty-frame hint) stay testable.

import { FrameBody, SkeletonBody } from "./protocol.js";

export const CONF_MIN = 0.1;

// COCO-18 bone pairs (torso, arms, legs, face).
export const BONES: Array<[number, number]> = [
  [1, 2], [1, 5], [2, 3], [3, 4], [5, 6], [6, 7],
  [1, 8], [8, 9], [9, 10], [1, 11], [11, 12], [12, 13],
  [0, 1], [0, 14], [14, 16], [0, 15], [15, 17],
];

export const ROLE_COLORS: Record<string, string> = {
  participant: "#2e86de",
  model: "#e67e22",
  unassigned: "#95a5a6",
};

export interface Segment {
  x1: number; y1: number; x2: number; y2: number;
  color: string;
}

export interface Point {
  x: number; y: number; color: string;
}

export interface OverlayModel {
  segments: Segment[];
  points: Point[];
  hint: string | null; // shown when there is nothing to draw
  rolesAssigned: boolean;
}

function joint(kp: number[], j: number): [number, number, number] {
  return [kp[3 * j], kp[3 * j + 1], kp[3 * j + 2]];
}

export function skeletonSegments(skeleton: SkeletonBody): Segment[] {
  const color = ROLE_COLORS[skeleton.role] ?? ROLE_COLORS.unassigned;
  const out: Segment[] = [];
  for (const [a, b] of BONES) {
    const [x1, y1, c1] = joint(skeleton.keypoints, a);
    const [x2, y2, c2] = joint(skeleton.keypoints, b);
    if (c1 >= CONF_MIN && c2 >= CONF_MIN) {
      out.push({ x1, y1, x2, y2, color });
    }
  }
  return out;
}

export function overlayModel(frame: FrameBody | null): OverlayModel {
  if (!frame || frame.skeletons.length === 0) {
    return { segments: [], points: [], hint: "no detection",
             rolesAssigned: false };
  }
  const segments: Segment[] = [];
  const points: Point[] = [];
  let rolesAssigned = false;
  for (const skeleton of frame.skeletons) {
    if (skeleton.role !== "unassigned") rolesAssigned = true;
    segments.push(...skeletonSegments(skeleton));
    const color = ROLE_COLORS[skeleton.role] ?? ROLE_COLORS.unassigned;
    for (let j = 0; j < 18; j += 1) {
      const [x, y, c] = joint(skeleton.keypoints, j);
      if (c >= CONF_MIN) points.push({ x, y, color });
    }
  }
  return {
    segments, points,
    hint: rolesAssigned ? null : "assign roles",
    rolesAssigned,
  };
}

export function drawOverlay(canvas: HTMLCanvasElement,
                            frame: FrameBody | null): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const model = overlayModel(frame);
  const sx = canvas.width / 1280;
  const sy = canvas.height / 720;
  ctx.lineWidth = 3;
  for (const seg of model.segments) {
    ctx.strokeStyle = seg.color;
    ctx.beginPath();
    ctx.moveTo(seg.x1 * sx, seg.y1 * sy);
    ctx.lineTo(seg.x2 * sx, seg.y2 * sy);
    ctx.stroke();
  }
  for (const pt of model.points) {
    ctx.fillStyle = pt.color;
    ctx.beginPath();
    ctx.arc(pt.x * sx, pt.y * sy, 3, 0, 2 * Math.PI);
    ctx.fill();
  }
  if (model.hint) {
    ctx.fillStyle = "#ccc";
    ctx.font = "20px sans-serif";
    ctx.fillText(model.hint, 20, 40);
  }
}
