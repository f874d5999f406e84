/** Coordinate transforms between signal space and screen space.
 *
 * Pure functions of the viewport, so rendering is a deterministic function
 * of (record bytes, view state). The calibration convention: at zoom 1 one
 * paper millimeter is PX_PER_MM device pixels; gain is mm/mV, sweep speed
 * mm/s, exactly as on printed ECG paper. */

export const PX_PER_MM = 4;

export interface Viewport {
  /** Left edge of the visible window, seconds. */
  t0: number;
  /** Magnification on top of the paper scale. */
  zoom: number;
  gainMmPerMv: number;
  speedMmPerS: number;
  /** Vertical pixel position of 0 uV. */
  baselineY: number;
}

export function timeToX(timeS: number, vp: Viewport): number {
  return (timeS - vp.t0) * vp.speedMmPerS * PX_PER_MM * vp.zoom;
}

export function xToTime(x: number, vp: Viewport): number {
  return vp.t0 + x / (vp.speedMmPerS * PX_PER_MM * vp.zoom);
}

export function sampleToX(sampleIndex: number, fs: number, vp: Viewport): number {
  return timeToX(sampleIndex / fs, vp);
}

export function microvoltsToY(uv: number, vp: Viewport): number {
  return vp.baselineY - (uv / 1000) * vp.gainMmPerMv * PX_PER_MM * vp.zoom;
}

export function yToMicrovolts(y: number, vp: Viewport): number {
  return ((vp.baselineY - y) * 1000) / (vp.gainMmPerMv * PX_PER_MM * vp.zoom);
}

/** Snap a time to the sample grid. */
export function snapToSample(timeS: number, fs: number): number {
  return Math.round(timeS * fs) / fs;
}

export interface CaliperDelta {
  samples: number;
  deltaMs: number;
  deltaUv: number;
}

/** Caliper read-out: the time delta is rounded to the nearest sample
 * period, so it is always an integer multiple of 1000/fs milliseconds. */
export function caliperDelta(
  t1: number,
  uv1: number,
  t2: number,
  uv2: number,
  fs: number,
): CaliperDelta {
  const samples = Math.abs(Math.round((t2 - t1) * fs));
  return {
    samples,
    deltaMs: (samples * 1000) / fs,
    deltaUv: Math.abs(uv2 - uv1),
  };
}
