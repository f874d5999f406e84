/** Viewer entry point: DOM wiring around the pure core. */

import { ApiClient, ApiError } from "./api.js";
import { drawAxisDial, describeAxis } from "./axisdial.js";
import { drawRecord, layoutPanes, paneViewport } from "./render.js";
import { defaultViewState, validateViewState, ViewState } from "./state.js";
import {
  AxisPick,
  axisPickProblem,
  caliperReadout,
  manualAxisTool,
  pushCaliperAnchor,
} from "./tools.js";
import { xToTime, yToMicrovolts } from "./transform.js";
import { durationSeconds, leadMicrovolts, parseBatch } from "./tvb.js";
import { EcgRecordData, FilterFlags, LeadName, MeasurementReport } from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const BEAT_LABEL_NAMES: Record<number, string> = {
  0: "normal",
  1: "normal, short RR",
  2: "abnormal",
};

class ViewerApp {
  private api: ApiClient | null = null;
  private record: EcgRecordData | null = null;
  private report: MeasurementReport | null = null;
  private state: ViewState = defaultViewState();
  private openAbort: AbortController | null = null;
  private mode: "pan" | "caliper" | "axis" = "pan";
  private axisPicks: AxisPick[] = [];
  private pendingPick: { lead: LeadName; baselineUv: number } | null = null;

  private readonly canvas = $<HTMLCanvasElement>("ecg-canvas");
  private readonly dial = $<HTMLCanvasElement>("axis-dial");

  constructor() {
    this.bindControls();
    this.resize();
    window.addEventListener("resize", () => this.resize());
  }

  // -- connection and record list --------------------------------------

  private bindControls(): void {
    $<HTMLButtonElement>("connect").addEventListener("click", () => void this.connect());
    for (const name of ["hp", "lp", "notch", "baseline", "emg"] as (keyof FilterFlags)[]) {
      $<HTMLSelectElement>(`filter-${name}`).addEventListener("change", () => {
        void this.applyFilters();
      });
    }
    $<HTMLInputElement>("gain").addEventListener("change", (e) => {
      this.state.gainMmPerMv = Number((e.target as HTMLInputElement).value) || 10;
      this.redraw();
    });
    $<HTMLInputElement>("speed").addEventListener("change", (e) => {
      this.state.speedMmPerS = Number((e.target as HTMLInputElement).value) || 25;
      this.redraw();
    });
    $<HTMLButtonElement>("zoom-in").addEventListener("click", () => this.zoomBy(1.25));
    $<HTMLButtonElement>("zoom-out").addEventListener("click", () => this.zoomBy(1 / 1.25));
    $<HTMLInputElement>("overlay-toggle").addEventListener("change", (e) => {
      const on = (e.target as HTMLInputElement).checked;
      this.state.showFiducials = on;
      this.state.showGlobalMarkers = on;
      this.redraw();
    });
    for (const mode of ["pan", "caliper", "axis"] as const) {
      $<HTMLButtonElement>(`mode-${mode}`).addEventListener("click", () => this.setMode(mode));
    }
    this.canvas.addEventListener("mousedown", (e) => this.onCanvasClick(e));
    this.canvas.addEventListener("mousemove", (e) => this.onCanvasMove(e));
    $<HTMLButtonElement>("pan-left").addEventListener("click", () => this.panBy(-1));
    $<HTMLButtonElement>("pan-right").addEventListener("click", () => this.panBy(+1));
  }

  private async connect(): Promise<void> {
    const base = $<HTMLInputElement>("server-url").value.trim() || "http://127.0.0.1:8240";
    this.api = new ApiClient(base);
    this.showError(null);
    try {
      const metas = await this.api.listRecords();
      const list = $<HTMLUListElement>("record-list");
      list.innerHTML = "";
      for (const meta of metas) {
        const item = document.createElement("li");
        item.textContent = `${meta.record_id}  (${meta.ambulance_id}, ${meta.recorded_at})`;
        item.addEventListener("click", () => void this.open(meta.record_id));
        list.appendChild(item);
      }
      $<HTMLSpanElement>("list-status").textContent = `${metas.length} record(s)`;
    } catch (err) {
      this.showError(`cannot list records: ${(err as Error).message}`);
    }
  }

  private async open(recordId: string): Promise<void> {
    if (!this.api) return;
    this.openAbort?.abort();
    const abort = new AbortController();
    this.openAbort = abort;
    this.showError(null);
    this.record = null;
    this.report = null;
    this.state = { ...defaultViewState(), recordId, filters: this.currentFilters() };
    try {
      const text = await this.api.fetchRecordText(recordId, this.state.filters, abort.signal);
      if (abort.signal.aborted) return;
      this.record = parseBatch(text);
      this.state = validateViewState(this.state, durationSeconds(this.record));
      this.redraw();
      await this.loadMeasurements(recordId, abort);
    } catch (err) {
      if (abort.signal.aborted) return;
      this.record = null;
      this.showError(`cannot open ${recordId}: ${(err as Error).message}`);
      this.redraw();
    }
  }

  private async loadMeasurements(recordId: string, abort: AbortController): Promise<void> {
    if (!this.api) return;
    try {
      this.report = await this.api.fetchMeasurements(recordId, abort.signal);
      this.renderMeasurementPanel();
    } catch (err) {
      if (abort.signal.aborted) return;
      this.report = null;
      // Unmeasurable records still render; the panel shows the error verbatim.
      const message = err instanceof ApiError ? err.message : String(err);
      $<HTMLDivElement>("measurements").innerHTML =
        `<div class="error-banner">${message}</div>`;
    }
    this.redraw();
  }

  private async applyFilters(): Promise<void> {
    if (this.state.recordId) await this.open(this.state.recordId);
  }

  private currentFilters(): FilterFlags {
    return {
      hp: $<HTMLSelectElement>("filter-hp").value as FilterFlags["hp"],
      lp: $<HTMLSelectElement>("filter-lp").value as FilterFlags["lp"],
      notch: $<HTMLSelectElement>("filter-notch").value as FilterFlags["notch"],
      baseline: $<HTMLSelectElement>("filter-baseline").value as FilterFlags["baseline"],
      emg: $<HTMLSelectElement>("filter-emg").value as FilterFlags["emg"],
    };
  }

  // -- interaction ------------------------------------------------------

  private setMode(mode: "pan" | "caliper" | "axis"): void {
    this.mode = mode;
    this.axisPicks = [];
    this.pendingPick = null;
    for (const m of ["pan", "caliper", "axis"] as const) {
      $<HTMLButtonElement>(`mode-${m}`).classList.toggle("active", m === mode);
    }
    $<HTMLSpanElement>("tool-status").textContent =
      mode === "axis" ? "pick baseline, then peak, on two limb leads" : "";
  }

  private zoomBy(factor: number): void {
    this.state.zoom = Math.min(16, Math.max(0.25, this.state.zoom * factor));
    this.redraw();
  }

  private panBy(direction: number): void {
    if (!this.record) return;
    const span = 1.0 / this.state.zoom;
    const duration = durationSeconds(this.record);
    this.state.windowStartS = Math.min(
      Math.max(0, this.state.windowStartS + direction * span),
      Math.max(0, duration - 0.5),
    );
    this.redraw();
  }

  private hitTest(e: MouseEvent): { lead: LeadName; timeS: number; uv: number } | null {
    if (!this.record) return null;
    const rect = this.canvas.getBoundingClientRect();
    const x = e.clientX - rect.left;
    const y = e.clientY - rect.top;
    const pane = layoutPanes(this.canvas.width, this.canvas.height).find(
      (p) => x >= p.x && x < p.x + p.width && y >= p.y && y < p.y + p.height,
    );
    if (!pane) return null;
    const vp = paneViewport(pane, this.state);
    return {
      lead: pane.lead,
      timeS: xToTime(x - pane.x, vp),
      uv: yToMicrovolts(y, vp),
    };
  }

  private onCanvasClick(e: MouseEvent): void {
    const hit = this.hitTest(e);
    if (!hit) return;
    if (this.mode === "caliper") {
      const fs = this.record!.sampleRateHz;
      const snapped = Math.round(hit.timeS * fs) / fs;
      this.state.caliper = pushCaliperAnchor(this.state.caliper, {
        lead: hit.lead,
        timeS: snapped,
        uv: hit.uv,
      });
      this.updateCaliperReadout();
      this.redraw();
    } else if (this.mode === "axis") {
      void this.onAxisPick(hit);
    }
  }

  private onCanvasMove(e: MouseEvent): void {
    if (this.mode !== "caliper" || this.state.caliper.length !== 1) return;
    const hit = this.hitTest(e);
    if (!hit || !this.record) return;
    const fs = this.record.sampleRateHz;
    const preview = [
      this.state.caliper[0],
      { lead: hit.lead, timeS: Math.round(hit.timeS * fs) / fs, uv: hit.uv },
    ];
    const readout = caliperReadout(preview, fs);
    if (readout) {
      $<HTMLSpanElement>("caliper-readout").textContent =
        `${readout.deltaMs.toFixed(0)} ms  /  ${readout.deltaUv.toFixed(0)} uV (live)`;
    }
  }

  private updateCaliperReadout(): void {
    if (!this.record) return;
    const readout = caliperReadout(this.state.caliper, this.record.sampleRateHz);
    $<HTMLSpanElement>("caliper-readout").textContent = readout
      ? `${readout.deltaMs.toFixed(0)} ms  /  ${readout.deltaUv.toFixed(0)} uV`
      : "";
  }

  private async onAxisPick(hit: { lead: LeadName; timeS: number; uv: number }): Promise<void> {
    if (!this.pendingPick) {
      this.pendingPick = { lead: hit.lead, baselineUv: this.sampleUvAt(hit.lead, hit.timeS) };
      $<HTMLSpanElement>("tool-status").textContent =
        `baseline on ${hit.lead}; now pick its peak`;
      return;
    }
    if (this.pendingPick.lead !== hit.lead) {
      $<HTMLSpanElement>("tool-status").textContent =
        `peak must be on ${this.pendingPick.lead}; baseline reset`;
      this.pendingPick = null;
      return;
    }
    const pick: AxisPick = {
      lead: hit.lead,
      baselineUv: this.pendingPick.baselineUv,
      peakUv: this.sampleUvAt(hit.lead, hit.timeS),
    };
    this.pendingPick = null;
    this.axisPicks.push(pick);
    if (this.axisPicks.length < 2) {
      const problem = axisPickProblem(this.axisPicks[0], this.axisPicks[0]);
      if (problem && !problem.includes("distinct")) {
        $<HTMLSpanElement>("tool-status").textContent = problem;
        this.axisPicks = [];
        return;
      }
      $<HTMLSpanElement>("tool-status").textContent =
        `lead ${pick.lead} done; pick baseline on a second limb lead`;
      return;
    }
    const [a, b] = this.axisPicks;
    this.axisPicks = [];
    if (!this.api) return;
    try {
      const angle = await manualAxisTool(this.api, a, b);
      $<HTMLSpanElement>("tool-status").textContent =
        `manual axis: ${angle.toFixed(1)} deg (${describeAxis(angle)})`;
      drawAxisDial(this.dial.getContext("2d")!, angle, this.dial.width);
    } catch (err) {
      $<HTMLSpanElement>("tool-status").textContent = (err as Error).message;
    }
  }

  private sampleUvAt(lead: LeadName, timeS: number): number {
    if (!this.record) return 0;
    const samples = leadMicrovolts(this.record, lead);
    const index = Math.min(
      samples.length - 1,
      Math.max(0, Math.round(timeS * this.record.sampleRateHz)),
    );
    return samples[index];
  }

  // -- output -----------------------------------------------------------

  private renderMeasurementPanel(): void {
    const report = this.report;
    if (!report) return;
    const g = report.global;
    const axes = report.axes;
    const fmt = (v: number | null, unit: string) => (v === null ? "–" : `${Math.round(v * 10) / 10} ${unit}`);
    const dominantLead = report.leads[report.detection_lead] ?? [];
    const dominantBeat = dominantLead[report.dominant_beat];
    const qrsType = dominantBeat?.qrs_type ?? "–";
    const labels = report.beat_labels
      .map((l, i) => `${i}${i === report.dominant_beat ? "*" : ""}:${BEAT_LABEL_NAMES[l] ?? l}`)
      .join(", ");
    $<HTMLDivElement>("measurements").innerHTML = `
      <table>
        <tr><td>P duration</td><td>${fmt(g.p_duration_ms, "ms")}</td></tr>
        <tr><td>QRS duration</td><td>${fmt(g.qrs_duration_ms, "ms")}</td></tr>
        <tr><td>PQ interval</td><td>${fmt(g.pq_interval_ms, "ms")}</td></tr>
        <tr><td>QT interval</td><td>${fmt(g.qt_interval_ms, "ms")}</td></tr>
        <tr><td>Heart rate</td><td>${fmt(g.heart_rate_bpm, "bpm")}</td></tr>
        <tr><td>P axis</td><td>${fmt(axes.p_axis_deg, "°")}</td></tr>
        <tr><td>QRS axis</td><td>${fmt(axes.qrs_axis_deg, "°")}</td></tr>
        <tr><td>T axis</td><td>${fmt(axes.t_axis_deg, "°")}</td></tr>
        <tr><td>Dominant QRS type</td><td>${qrsType}</td></tr>
      </table>
      <p class="beats">beats (*=dominant): ${labels}</p>`;
    drawAxisDial(this.dial.getContext("2d")!, axes.qrs_axis_deg, this.dial.width);
  }

  private showError(message: string | null): void {
    const banner = $<HTMLDivElement>("error-banner");
    banner.textContent = message ?? "";
    banner.style.display = message ? "block" : "none";
  }

  private resize(): void {
    const holder = $<HTMLDivElement>("canvas-holder");
    this.canvas.width = holder.clientWidth;
    this.canvas.height = holder.clientHeight;
    this.redraw();
  }

  private redraw(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    if (!this.record) {
      ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
      return;
    }
    drawRecord(ctx, this.record, this.state, this.report, this.canvas.width, this.canvas.height);
    this.updateCaliperReadout();
  }
}

new ViewerApp();
