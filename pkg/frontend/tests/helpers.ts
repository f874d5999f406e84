/** Test fixtures: build tag-value batch text the way the service emits it. */

import { LEAD_ORDER } from "../src/types.js";

export function b64int32(values: number[]): string {
  const bytes = new Uint8Array(values.length * 4);
  const view = new DataView(bytes.buffer);
  values.forEach((v, i) => view.setInt32(i * 4, v, true));
  let bin = "";
  for (const b of bytes) bin += String.fromCharCode(b);
  return btoa(bin);
}

export interface FixtureOptions {
  nsamp?: number;
  fs?: number;
  leadSamples?: Partial<Record<string, number[]>>;
}

export function batchText(options: FixtureOptions = {}): string {
  const nsamp = options.nsamp ?? 4;
  const fs = options.fs ?? 500;
  const lines = [
    "PROTO=1",
    "DEVICE_ID=DEV-T",
    "AMBULANCE_ID=AMB-T",
    "REC_TIME=2026-01-01T00:00:00Z",
    `FS=${fs}`,
    "RES_BITS=24",
    "LSB_NV=1000",
    `NSAMP=${nsamp}`,
    `LEADS=${LEAD_ORDER.join(",")}`,
  ];
  for (const lead of LEAD_ORDER) {
    const samples = options.leadSamples?.[lead] ?? new Array(nsamp).fill(0);
    lines.push(`LEAD.${lead.toUpperCase()}=${b64int32(samples)}`);
  }
  return lines.join("\n") + "\n";
}

/** Minimal Response-like helper for fetch mocks. */
export function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
