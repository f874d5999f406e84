/** Tag-value batch parsing: TAG=VALUE lines, base64 int32 little-endian
 * sample blocks. The browser-side twin of the repository's record codec. */

import { EcgRecordData, LEAD_ORDER, LeadName } from "./types.js";

const HEADER_TAGS = [
  "PROTO", "DEVICE_ID", "AMBULANCE_ID", "REC_TIME",
  "FS", "RES_BITS", "LSB_NV", "NSAMP",
] as const;

export class BatchParseError extends Error {}

function leadTag(lead: LeadName): string {
  return `LEAD.${lead.toUpperCase()}`;
}

function decodeSamples(tag: string, value: string, expected: number): Int32Array {
  let raw: string;
  try {
    raw = atob(value);
  } catch {
    throw new BatchParseError(`malformed base64 in ${tag}`);
  }
  if (raw.length % 4 !== 0) {
    throw new BatchParseError(`sample block of ${tag} is not whole int32 values`);
  }
  const count = raw.length / 4;
  if (count !== expected) {
    throw new BatchParseError(
      `length mismatch on ${tag}: got ${count} samples, NSAMP says ${expected}`,
    );
  }
  const bytes = new Uint8Array(raw.length);
  for (let i = 0; i < raw.length; i++) bytes[i] = raw.charCodeAt(i);
  const view = new DataView(bytes.buffer);
  const samples = new Int32Array(count);
  for (let i = 0; i < count; i++) samples[i] = view.getInt32(i * 4, true);
  return samples;
}

function positiveInt(tag: string, value: string): number {
  const parsed = Number(value);
  if (!Number.isInteger(parsed) || parsed <= 0) {
    throw new BatchParseError(`tag ${tag} must be a positive integer, got ${value}`);
  }
  return parsed;
}

export function parseBatch(text: string): EcgRecordData {
  if (text.endsWith("\n")) text = text.slice(0, -1);
  if (!text) throw new BatchParseError("empty batch");

  const values = new Map<string, string>();
  for (const line of text.split("\n")) {
    const sep = line.indexOf("=");
    if (sep <= 0) throw new BatchParseError(`malformed line: ${line.slice(0, 40)}`);
    const tag = line.slice(0, sep);
    if (values.has(tag)) throw new BatchParseError(`duplicate tag ${tag}`);
    values.set(tag, line.slice(sep + 1));
  }

  for (const tag of HEADER_TAGS) {
    if (!values.has(tag)) throw new BatchParseError(`missing mandatory tag ${tag}`);
  }
  const nsamp = positiveInt("NSAMP", values.get("NSAMP")!);

  const leads = new Map<LeadName, Int32Array>();
  const known = new Set<string>([...HEADER_TAGS, "LEADS", "HR", "NIBP_SYS", "NIBP_DIA", "NIBP_MAP"]);
  for (const lead of LEAD_ORDER) {
    const tag = leadTag(lead);
    const value = values.get(tag);
    if (value === undefined) throw new BatchParseError(`missing mandatory tag ${tag}`);
    leads.set(lead, decodeSamples(tag, value, nsamp));
    known.add(tag);
  }

  const extras = new Map<string, string>();
  for (const [tag, value] of values) {
    if (!known.has(tag)) extras.set(tag, value);
  }

  return {
    deviceId: values.get("DEVICE_ID")!,
    ambulanceId: values.get("AMBULANCE_ID")!,
    recordedAt: values.get("REC_TIME")!,
    sampleRateHz: positiveInt("FS", values.get("FS")!),
    resolutionBits: positiveInt("RES_BITS", values.get("RES_BITS")!),
    lsbNanovolts: positiveInt("LSB_NV", values.get("LSB_NV")!),
    durationSamples: nsamp,
    leads,
    extras,
  };
}

/** One lead converted to microvolts. */
export function leadMicrovolts(record: EcgRecordData, lead: LeadName): Float64Array {
  const counts = record.leads.get(lead);
  if (!counts) throw new BatchParseError(`no lead ${lead}`);
  const out = new Float64Array(counts.length);
  const scale = record.lsbNanovolts / 1000;
  for (let i = 0; i < counts.length; i++) out[i] = counts[i] * scale;
  return out;
}

export function durationSeconds(record: EcgRecordData): number {
  return record.durationSamples / record.sampleRateHz;
}
