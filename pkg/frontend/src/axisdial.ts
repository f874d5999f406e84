/** Axis dial: the hexaxial reference circle with a needle at the angle.
 * ECG convention: 0 degrees points right (lead I), positive angles go
 * clockwise on screen (aVF at +90 points down). */

export function describeAxis(angleDeg: number): string {
  if (angleDeg > -30 && angleDeg <= 90) return "normal axis";
  if (angleDeg > 90 && angleDeg <= 180) return "right axis deviation";
  if (angleDeg <= -30 && angleDeg > -90) return "left axis deviation";
  return "extreme axis deviation";
}

export function needleEnd(
  angleDeg: number,
  cx: number,
  cy: number,
  radius: number,
): { x: number; y: number } {
  const rad = (angleDeg * Math.PI) / 180;
  return { x: cx + radius * Math.cos(rad), y: cy + radius * Math.sin(rad) };
}

export function drawAxisDial(
  ctx: CanvasRenderingContext2D,
  angleDeg: number | null,
  size: number,
): void {
  const cx = size / 2;
  const cy = size / 2;
  const radius = size / 2 - 18;
  ctx.clearRect(0, 0, size, size);

  ctx.strokeStyle = "#bbb";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.arc(cx, cy, radius, 0, 2 * Math.PI);
  ctx.stroke();

  ctx.fillStyle = "#555";
  ctx.font = "10px sans-serif";
  for (let deg = -150; deg <= 180; deg += 30) {
    const tick = needleEnd(deg, cx, cy, radius);
    const label = needleEnd(deg, cx, cy, radius + 10);
    ctx.beginPath();
    ctx.moveTo(cx + (tick.x - cx) * 0.93, cy + (tick.y - cy) * 0.93);
    ctx.lineTo(tick.x, tick.y);
    ctx.stroke();
    ctx.fillText(`${deg}`, label.x - 8, label.y + 3);
  }

  if (angleDeg === null) return;
  const tip = needleEnd(angleDeg, cx, cy, radius * 0.9);
  ctx.strokeStyle = "#b03030";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(cx, cy);
  ctx.lineTo(tip.x, tip.y);
  ctx.stroke();
  ctx.fillStyle = "#b03030";
  ctx.beginPath();
  ctx.arc(tip.x, tip.y, 3, 0, 2 * Math.PI);
  ctx.fill();
}
