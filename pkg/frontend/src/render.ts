/** 12-lead rendering: standard 4x3 layout, calibration grid, waveforms,
 * fiducial and global-wave overlays, caliper.
 *
 * All geometry comes from pure helpers so the drawn coordinates are a
 * deterministic function of (record, view state, canvas size); the canvas
 * calls merely trace them. */

import { CaliperAnchor, ViewState } from "./state.js";
import {
  PX_PER_MM,
  Viewport,
  microvoltsToY,
  sampleToX,
  timeToX,
} from "./transform.js";
import { durationSeconds, leadMicrovolts } from "./tvb.js";
import {
  BeatFiducialsJson,
  EcgRecordData,
  LEAD_ORDER,
  LeadName,
  MeasurementReport,
} from "./types.js";

export interface LeadPane {
  lead: LeadName;
  x: number;
  y: number;
  width: number;
  height: number;
}

/** Standard 4x3 layout: columns (I,II,III), (aVR,aVL,aVF), (V1..V3), (V4..V6). */
export function layoutPanes(width: number, height: number): LeadPane[] {
  const columns = 4;
  const rows = 3;
  const paneW = width / columns;
  const paneH = height / rows;
  return LEAD_ORDER.map((lead, i) => {
    const column = Math.floor(i / rows);
    const row = i % rows;
    return { lead, x: column * paneW, y: row * paneH, width: paneW, height: paneH };
  });
}

export function paneViewport(pane: LeadPane, state: ViewState): Viewport {
  return {
    t0: state.windowStartS,
    zoom: state.zoom,
    gainMmPerMv: state.gainMmPerMv,
    speedMmPerS: state.speedMmPerS,
    baselineY: pane.y + pane.height * 0.55,
  };
}

/** Per-pane time window given the horizontal pane width. */
export function paneTimeSpanS(pane: LeadPane, state: ViewState): number {
  return pane.width / (state.speedMmPerS * PX_PER_MM * state.zoom);
}

/** Waveform polyline for the visible slice of one lead, in pane-local
 * canvas coordinates ([x0,y0, x1,y1, ...]). */
export function waveformPath(
  samplesUv: Float64Array,
  fs: number,
  pane: LeadPane,
  state: ViewState,
): Float32Array {
  const vp = paneViewport(pane, state);
  const spanS = paneTimeSpanS(pane, state);
  const first = Math.max(0, Math.floor(state.windowStartS * fs));
  const last = Math.min(samplesUv.length - 1, Math.ceil((state.windowStartS + spanS) * fs));
  if (last < first) return new Float32Array(0);
  const path = new Float32Array((last - first + 1) * 2);
  for (let i = first; i <= last; i++) {
    path[(i - first) * 2] = pane.x + sampleToX(i, fs, vp);
    path[(i - first) * 2 + 1] = microvoltsToY(samplesUv[i], vp);
  }
  return path;
}

/** Absolute x of a fiducial marker inside a pane. */
export function fiducialMarkerX(
  sampleIndex: number,
  fs: number,
  pane: LeadPane,
  state: ViewState,
): number {
  return pane.x + sampleToX(sampleIndex, fs, paneViewport(pane, state));
}

export interface FiducialMark {
  kind: string;
  sample: number;
  x: number;
}

const MARK_FIELDS: [keyof BeatFiducialsJson, string][] = [
  ["p_onset", "Pon"],
  ["p_peak", "P"],
  ["p_offset", "Poff"],
  ["qrs_onset", "Qon"],
  ["r_peak", "R"],
  ["qrs_offset", "Qoff"],
  ["t_onset", "Ton"],
  ["t_peak", "T"],
  ["t_offset", "Toff"],
];

export function fiducialMarks(
  beats: BeatFiducialsJson[],
  fs: number,
  pane: LeadPane,
  state: ViewState,
): FiducialMark[] {
  const marks: FiducialMark[] = [];
  for (const beat of beats) {
    for (const [field, kind] of MARK_FIELDS) {
      const sample = beat[field];
      if (typeof sample === "number") {
        marks.push({ kind, sample, x: fiducialMarkerX(sample, fs, pane, state) });
      }
    }
  }
  return marks;
}

// ---------------------------------------------------------------------------
// canvas drawing

const GRID_FINE = "#f3c6c6";
const GRID_BOLD = "#e38c8c";
const TRACE = "#12233b";
const MARK_COLORS: Record<string, string> = {
  Pon: "#2e8b57", P: "#2e8b57", Poff: "#2e8b57",
  Qon: "#b03030", R: "#b03030", Qoff: "#b03030",
  Ton: "#1c5bb0", T: "#1c5bb0", Toff: "#1c5bb0",
};

function drawGrid(ctx: CanvasRenderingContext2D, pane: LeadPane, zoom: number): void {
  const cell = PX_PER_MM * zoom; // 1 mm
  ctx.save();
  ctx.beginPath();
  ctx.rect(pane.x, pane.y, pane.width, pane.height);
  ctx.clip();
  for (let k = 0; k * cell <= pane.width; k++) {
    ctx.strokeStyle = k % 5 === 0 ? GRID_BOLD : GRID_FINE;
    ctx.lineWidth = k % 5 === 0 ? 1 : 0.5;
    const x = pane.x + k * cell;
    ctx.beginPath();
    ctx.moveTo(x, pane.y);
    ctx.lineTo(x, pane.y + pane.height);
    ctx.stroke();
  }
  for (let k = 0; k * cell <= pane.height; k++) {
    ctx.strokeStyle = k % 5 === 0 ? GRID_BOLD : GRID_FINE;
    ctx.lineWidth = k % 5 === 0 ? 1 : 0.5;
    const y = pane.y + k * cell;
    ctx.beginPath();
    ctx.moveTo(pane.x, y);
    ctx.lineTo(pane.x + pane.width, y);
    ctx.stroke();
  }
  ctx.restore();
}

function drawPolyline(ctx: CanvasRenderingContext2D, path: Float32Array): void {
  if (path.length < 4) return;
  ctx.beginPath();
  ctx.moveTo(path[0], path[1]);
  for (let i = 2; i < path.length; i += 2) ctx.lineTo(path[i], path[i + 1]);
  ctx.stroke();
}

export function drawRecord(
  ctx: CanvasRenderingContext2D,
  record: EcgRecordData,
  state: ViewState,
  report: MeasurementReport | null,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  const fs = record.sampleRateHz;
  const panes = layoutPanes(width, height);

  for (const pane of panes) {
    drawGrid(ctx, pane, state.zoom);
    ctx.save();
    ctx.beginPath();
    ctx.rect(pane.x, pane.y, pane.width, pane.height);
    ctx.clip();

    if (report && state.showGlobalMarkers) {
      drawGlobalWaves(ctx, report, fs, pane, state);
    }

    ctx.strokeStyle = TRACE;
    ctx.lineWidth = 1.2;
    drawPolyline(ctx, waveformPath(leadMicrovolts(record, pane.lead), fs, pane, state));

    if (report && state.showFiducials) {
      const beats = report.leads[pane.lead] ?? [];
      for (const mark of fiducialMarks(beats, fs, pane, state)) {
        if (mark.x < pane.x || mark.x > pane.x + pane.width) continue;
        ctx.strokeStyle = MARK_COLORS[mark.kind] ?? "#666";
        ctx.lineWidth = 1;
        ctx.beginPath();
        ctx.moveTo(mark.x, pane.y + pane.height * 0.12);
        ctx.lineTo(mark.x, pane.y + pane.height * 0.88);
        ctx.stroke();
      }
    }

    ctx.fillStyle = "#222";
    ctx.font = "12px sans-serif";
    ctx.fillText(pane.lead, pane.x + 6, pane.y + 14);
    ctx.restore();

    ctx.strokeStyle = "#999";
    ctx.lineWidth = 1;
    ctx.strokeRect(pane.x + 0.5, pane.y + 0.5, pane.width - 1, pane.height - 1);
  }

  drawCaliper(ctx, state.caliper, record, panes, state);
}

function drawGlobalWaves(
  ctx: CanvasRenderingContext2D,
  report: MeasurementReport,
  fs: number,
  pane: LeadPane,
  state: ViewState,
): void {
  const bands: [string, { onset: number; offset: number } | null][] = [
    ["#2e8b5722", report.global_waves.p],
    ["#b0303022", report.global_waves.qrs],
    ["#1c5bb022", report.global_waves.t],
  ];
  for (const [color, bounds] of bands) {
    if (!bounds) continue;
    const x0 = fiducialMarkerX(bounds.onset, fs, pane, state);
    const x1 = fiducialMarkerX(bounds.offset, fs, pane, state);
    ctx.fillStyle = color;
    ctx.fillRect(x0, pane.y, x1 - x0, pane.height);
  }
}

function drawCaliper(
  ctx: CanvasRenderingContext2D,
  anchors: CaliperAnchor[],
  record: EcgRecordData,
  panes: LeadPane[],
  state: ViewState,
): void {
  ctx.strokeStyle = "#7a28c9";
  ctx.lineWidth = 1.5;
  for (const anchor of anchors) {
    const pane = panes.find((p) => p.lead === anchor.lead);
    if (!pane) continue;
    const vp = paneViewport(pane, state);
    const x = pane.x + timeToX(anchor.timeS, vp);
    const y = microvoltsToY(anchor.uv, vp);
    ctx.beginPath();
    ctx.moveTo(x, pane.y);
    ctx.lineTo(x, pane.y + pane.height);
    ctx.stroke();
    ctx.beginPath();
    ctx.arc(x, y, 3, 0, 2 * Math.PI);
    ctx.stroke();
  }
}

export function recordDurationS(record: EcgRecordData): number {
  return durationSeconds(record);
}
