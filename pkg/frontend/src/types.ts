/** Shared domain types mirroring the repository service's JSON contracts. */

export const LEAD_ORDER = [
  "I", "II", "III", "aVR", "aVL", "aVF",
  "V1", "V2", "V3", "V4", "V5", "V6",
] as const;

export type LeadName = (typeof LEAD_ORDER)[number];

export const LIMB_LEADS: readonly LeadName[] = ["I", "II", "III", "aVR", "aVL", "aVF"];

export interface RecordMeta {
  record_id: string;
  received_at: string;
  device_id: string;
  ambulance_id: string;
  recorded_at: string;
  byte_size: number;
}

export interface EcgRecordData {
  deviceId: string;
  ambulanceId: string;
  recordedAt: string;
  sampleRateHz: number;
  resolutionBits: number;
  lsbNanovolts: number;
  durationSamples: number;
  leads: Map<LeadName, Int32Array>;
  extras: Map<string, string>;
}

export interface BeatFiducialsJson {
  p_onset: number | null;
  p_peak: number | null;
  p_offset: number | null;
  qrs_onset: number | null;
  q_peak: number | null;
  r_peak: number | null;
  s_peak: number | null;
  r_prime_peak: number | null;
  qrs_offset: number | null;
  t_onset: number | null;
  t_peak: number | null;
  t_offset: number | null;
  beat_label: number | null;
  qrs_type: string | null;
}

export interface WaveBoundsJson {
  onset: number;
  offset: number;
}

export interface MeasurementReport {
  schema: string;
  record_id: string | null;
  global: {
    p_duration_ms: number | null;
    qrs_duration_ms: number | null;
    pq_interval_ms: number | null;
    qt_interval_ms: number | null;
    heart_rate_bpm: number | null;
  };
  axes: {
    p_axis_deg: number | null;
    qrs_axis_deg: number | null;
    t_axis_deg: number | null;
  };
  global_waves: {
    p: WaveBoundsJson | null;
    qrs: WaveBoundsJson | null;
    t: WaveBoundsJson | null;
  };
  dominant_beat: number;
  beat_labels: number[];
  r_peaks: number[];
  detection_lead: string;
  leads: Record<string, BeatFiducialsJson[]>;
}

/** Filter toggles; the names and values match the service query parameters
 * and the CLI flags exactly (one semantics, two frontends). */
export interface FilterFlags {
  hp: "on" | "off";
  lp: "on" | "off";
  notch: "50" | "60" | "off";
  baseline: "on" | "off";
  emg: "on" | "off";
}

export const DEFAULT_FILTERS: FilterFlags = {
  hp: "on",
  lp: "on",
  notch: "50",
  baseline: "on",
  emg: "off",
};
