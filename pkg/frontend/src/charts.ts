// Hand-rolled SVG charts: a line chart for optimization history, bars for
// parameter importance, and 2x2 heatmaps for confusion matrices. Returning
// markup strings keeps them renderer-agnostic and easy to assert on.

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function fmt(value: number): string {
  if (!Number.isFinite(value)) return "";
  if (value !== 0 && (Math.abs(value) < 1e-3 || Math.abs(value) >= 1e5)) {
    return value.toExponential(2);
  }
  return String(Math.round(value * 1e4) / 1e4);
}

export interface LinePoint {
  x: number;
  y: number;
}

export function lineChart(
  series: { label: string; points: LinePoint[]; color: string }[],
  title: string,
  width = 420,
  height = 240,
): string {
  const pad = { top: 28, right: 12, bottom: 26, left: 48 };
  const all = series.flatMap((s) => s.points);
  const parts: string[] = [
    `<svg class="chart line-chart" viewBox="0 0 ${width} ${height}" role="img" aria-label="${esc(title)}">`,
    `<text class="chart-title" x="${width / 2}" y="16" text-anchor="middle">${esc(title)}</text>`,
  ];
  if (all.length === 0) {
    parts.push(
      `<text class="chart-empty" x="${width / 2}" y="${height / 2}" text-anchor="middle">no data</text>`,
      "</svg>",
    );
    return parts.join("");
  }
  const xs = all.map((p) => p.x);
  const ys = all.map((p) => p.y);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const plotW = width - pad.left - pad.right;
  const plotH = height - pad.top - pad.bottom;
  const sx = (x: number) => pad.left + (xMax === xMin ? plotW / 2 : ((x - xMin) / (xMax - xMin)) * plotW);
  const sy = (y: number) => pad.top + (yMax === yMin ? plotH / 2 : (1 - (y - yMin) / (yMax - yMin)) * plotH);
  parts.push(
    `<line class="axis" x1="${pad.left}" y1="${pad.top}" x2="${pad.left}" y2="${height - pad.bottom}"/>`,
    `<line class="axis" x1="${pad.left}" y1="${height - pad.bottom}" x2="${width - pad.right}" y2="${height - pad.bottom}"/>`,
    `<text class="tick" x="${pad.left - 4}" y="${sy(yMax) + 4}" text-anchor="end">${fmt(yMax)}</text>`,
    `<text class="tick" x="${pad.left - 4}" y="${sy(yMin) + 4}" text-anchor="end">${fmt(yMin)}</text>`,
  );
  for (const s of series) {
    if (s.points.length === 0) continue;
    const path = s.points
      .map((p, i) => `${i === 0 ? "M" : "L"}${sx(p.x).toFixed(1)},${sy(p.y).toFixed(1)}`)
      .join(" ");
    parts.push(`<path class="series" data-label="${esc(s.label)}" d="${path}" fill="none" stroke="${s.color}" stroke-width="2"/>`);
    for (const p of s.points) {
      parts.push(`<circle cx="${sx(p.x).toFixed(1)}" cy="${sy(p.y).toFixed(1)}" r="3" fill="${s.color}"/>`);
    }
  }
  parts.push("</svg>");
  return parts.join("");
}

export function barChart(
  bars: { label: string; value: number }[],
  title: string,
  width = 420,
  height = 200,
): string {
  const pad = { top: 28, right: 12, bottom: 8, left: 110 };
  const max = Math.max(...bars.map((b) => b.value), 1e-12);
  const rowH = bars.length > 0 ? (height - pad.top - pad.bottom) / bars.length : 0;
  const parts: string[] = [
    `<svg class="chart bar-chart" viewBox="0 0 ${width} ${height}" role="img" aria-label="${esc(title)}">`,
    `<text class="chart-title" x="${width / 2}" y="16" text-anchor="middle">${esc(title)}</text>`,
  ];
  bars.forEach((bar, i) => {
    const y = pad.top + i * rowH;
    const barW = ((width - pad.left - pad.right) * bar.value) / max;
    parts.push(
      `<text class="tick" x="${pad.left - 6}" y="${y + rowH / 2 + 4}" text-anchor="end">${esc(bar.label)}</text>`,
      `<rect class="bar" data-label="${esc(bar.label)}" x="${pad.left}" y="${(y + 3).toFixed(1)}" width="${Math.max(barW, 0.5).toFixed(1)}" height="${Math.max(rowH - 6, 2).toFixed(1)}"/>`,
      `<text class="value" x="${(pad.left + barW + 4).toFixed(1)}" y="${y + rowH / 2 + 4}">${fmt(bar.value)}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("");
}

export function heatmap(
  matrix: number[][],
  rowLabels: string[],
  colLabels: string[],
  title: string,
  width = 240,
  height = 220,
): string {
  const pad = { top: 44, right: 10, bottom: 30, left: 86 };
  const rows = matrix.length;
  const cols = rows > 0 ? matrix[0].length : 0;
  const cellW = (width - pad.left - pad.right) / Math.max(cols, 1);
  const cellH = (height - pad.top - pad.bottom) / Math.max(rows, 1);
  const max = Math.max(...matrix.flat(), 1);
  const parts: string[] = [
    `<svg class="chart heatmap" viewBox="0 0 ${width} ${height}" role="img" aria-label="${esc(title)}">`,
    `<text class="chart-title" x="${width / 2}" y="16" text-anchor="middle">${esc(title)}</text>`,
  ];
  colLabels.forEach((label, j) => {
    parts.push(
      `<text class="tick" x="${pad.left + (j + 0.5) * cellW}" y="${pad.top - 8}" text-anchor="middle">${esc(label)}</text>`,
    );
  });
  rowLabels.forEach((label, i) => {
    parts.push(
      `<text class="tick" x="${pad.left - 6}" y="${pad.top + (i + 0.5) * cellH + 4}" text-anchor="end">${esc(label)}</text>`,
    );
  });
  matrix.forEach((row, i) => {
    row.forEach((value, j) => {
      const intensity = value / max;
      const x = pad.left + j * cellW;
      const y = pad.top + i * cellH;
      parts.push(
        `<rect class="cell" data-row="${i}" data-col="${j}" x="${x.toFixed(1)}" y="${y.toFixed(1)}" width="${cellW.toFixed(1)}" height="${cellH.toFixed(1)}" fill="rgba(37, 99, 235, ${(0.12 + 0.88 * intensity).toFixed(3)})"/>`,
        `<text class="cell-value" x="${(x + cellW / 2).toFixed(1)}" y="${(y + cellH / 2 + 4).toFixed(1)}" text-anchor="middle">${value}</text>`,
      );
    });
  });
  parts.push("</svg>");
  return parts.join("");
}
