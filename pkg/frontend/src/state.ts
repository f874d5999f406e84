/** Viewer state: one plain object driving the whole render. */

import { DEFAULT_FILTERS, FilterFlags, LeadName } from "./types.js";

export interface CaliperAnchor {
  lead: LeadName;
  timeS: number;
  uv: number;
}

export interface ViewState {
  recordId: string | null;
  windowStartS: number;
  windowEndS: number;
  gainMmPerMv: number;
  speedMmPerS: number;
  zoom: number;
  filters: FilterFlags;
  showFiducials: boolean;
  showGlobalMarkers: boolean;
  caliper: CaliperAnchor[];
}

export function defaultViewState(): ViewState {
  return {
    recordId: null,
    windowStartS: 0,
    windowEndS: 10,
    gainMmPerMv: 10,
    speedMmPerS: 25,
    zoom: 1,
    filters: { ...DEFAULT_FILTERS },
    showFiducials: true,
    showGlobalMarkers: true,
    caliper: [],
  };
}

/** Clamp the state against a record's duration; throws on nonsense. */
export function validateViewState(state: ViewState, durationS: number): ViewState {
  if (state.gainMmPerMv <= 0 || state.speedMmPerS <= 0 || state.zoom <= 0) {
    throw new Error("gain, speed and zoom must be positive");
  }
  if (state.caliper.length > 2) {
    throw new Error("at most two caliper anchors");
  }
  const start = Math.max(0, Math.min(state.windowStartS, durationS));
  const end = Math.max(start, Math.min(state.windowEndS, durationS));
  return { ...state, windowStartS: start, windowEndS: end };
}
