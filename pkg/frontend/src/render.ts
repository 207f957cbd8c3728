import { boundsOfPolylines, fitViewport, toScreen } from "./geometry.js";
import type { PairPayload, Point } from "./types.js";

// Candidate palette; the snowy track is always black.
export const CANDIDATE_COLORS = [
  "#e6550d",
  "#3182bd",
  "#31a354",
  "#756bb1",
  "#d6616b",
  "#8c6d31",
  "#17becf",
  "#bcbd22",
];

export function candidateColor(index: number): string {
  return CANDIDATE_COLORS[index % CANDIDATE_COLORS.length];
}

function drawPolyline(
  ctx: CanvasRenderingContext2D,
  polyline: Point[],
  project: (p: Point) => Point,
  color: string,
  lineWidth: number,
): void {
  if (polyline.length === 0) return;
  ctx.strokeStyle = color;
  ctx.fillStyle = color;
  ctx.lineWidth = lineWidth;
  if (polyline.length === 1) {
    const [x, y] = project(polyline[0]);
    ctx.beginPath();
    ctx.arc(x, y, lineWidth + 2, 0, 2 * Math.PI);
    ctx.fill();
    return;
  }
  ctx.beginPath();
  polyline.forEach((point, i) => {
    const [x, y] = project(point);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
}

/** Paint the snowy track plus every visible candidate, fit to bounds.
 * The selected candidate is drawn wider on top. */
export function drawScene(
  canvas: HTMLCanvasElement,
  pair: PairPayload,
  visible: ReadonlySet<string>,
  selected: string | null,
): void {
  let ctx: CanvasRenderingContext2D | null;
  try {
    ctx = canvas.getContext("2d");
  } catch {
    return; // headless test environments have no 2D context
  }
  if (!ctx) return;
  const polylines = [
    pair.snowy.polyline,
    ...pair.candidates.filter((c) => visible.has(c.clear_id)).map((c) => c.polyline),
  ];
  const bounds = boundsOfPolylines(polylines);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!bounds) return;
  const viewport = fitViewport(bounds, canvas.width, canvas.height);
  const project = (p: Point) => toScreen(p, viewport);

  pair.candidates.forEach((candidate, index) => {
    if (!visible.has(candidate.clear_id) || candidate.clear_id === selected) return;
    drawPolyline(ctx, candidate.polyline, project, candidateColor(index), 1.5);
  });
  const selectedIndex = pair.candidates.findIndex((c) => c.clear_id === selected);
  if (selectedIndex >= 0 && visible.has(selected as string)) {
    drawPolyline(
      ctx,
      pair.candidates[selectedIndex].polyline,
      project,
      candidateColor(selectedIndex),
      3.5,
    );
  }
  drawPolyline(ctx, pair.snowy.polyline, project, "#000000", 2.5);
}
