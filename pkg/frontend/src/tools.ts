/** Interactive measurement tools: caliper bookkeeping and the manual-axis
 * tool. The axis math itself lives on the server; the tool validates the
 * picks, formats the request and reports the angle. */

import { ApiClient } from "./api.js";
import { CaliperAnchor } from "./state.js";
import { caliperDelta, CaliperDelta } from "./transform.js";
import { LeadName, LIMB_LEADS } from "./types.js";

/** Adds or replaces caliper anchors: a third click restarts the pair. */
export function pushCaliperAnchor(
  anchors: CaliperAnchor[],
  anchor: CaliperAnchor,
): CaliperAnchor[] {
  if (anchors.length >= 2) return [anchor];
  return [...anchors, anchor];
}

/** The live read-out; null until two anchors are set. */
export function caliperReadout(anchors: CaliperAnchor[], fs: number): CaliperDelta | null {
  if (anchors.length < 2) return null;
  const [a, b] = anchors;
  return caliperDelta(a.timeS, a.uv, b.timeS, b.uv, fs);
}

export interface AxisPick {
  lead: LeadName;
  baselineUv: number;
  peakUv: number;
}

/** Validation message for a pick pair, or null when acceptable. */
export function axisPickProblem(a: AxisPick | null, b: AxisPick | null): string | null {
  if (!a || !b) return "pick baseline and peak on two limb leads";
  for (const pick of [a, b]) {
    if (!LIMB_LEADS.includes(pick.lead)) {
      return `lead ${pick.lead} has no frontal-plane vector; pick a limb lead`;
    }
  }
  if (a.lead === b.lead) return "pick two distinct limb leads";
  return null;
}

/** Calls the service's manual-axis endpoint; throws before any request is
 * sent when the picks are invalid. */
export async function manualAxisTool(
  api: ApiClient,
  a: AxisPick,
  b: AxisPick,
): Promise<number> {
  const problem = axisPickProblem(a, b);
  if (problem) throw new Error(problem);
  return api.manualAxis({
    lead_a: a.lead,
    baseline_a: a.baselineUv,
    peak_a: a.peakUv,
    lead_b: b.lead,
    baseline_b: b.baselineUv,
    peak_b: b.peakUv,
  });
}
