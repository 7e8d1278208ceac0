import type { FigureSpec } from "./figure.js";
import { Canvas, type Rgb } from "./raster.js";
import { textWidth } from "./font.js";

export interface ChartOptions {
  logX?: boolean;
  width?: number;
  height?: number;
}

const MARGIN = { left: 54, bottom: 40, top: 28, right: 12 };

const PALETTE: Rgb[] = [
  [31, 119, 180],
  [255, 127, 14],
  [44, 160, 44],
  [214, 39, 40],
  [148, 103, 189],
  [140, 86, 75],
];

const BLACK: Rgb = [0, 0, 0];
const GREY: Rgb = [200, 200, 200];

function lighten(c: Rgb): Rgb {
  return [
    Math.round(255 - (255 - c[0]) * 0.25),
    Math.round(255 - (255 - c[1]) * 0.25),
    Math.round(255 - (255 - c[2]) * 0.25),
  ];
}

function formatTick(v: number): string {
  if (Number.isInteger(v)) return String(v);
  const s = v.toPrecision(3);
  return String(Number(s));
}

/** Round step up to 1, 2, or 5 times a power of ten. */
function niceStep(span: number, maxTicks: number): number {
  const rough = span / Math.max(1, maxTicks);
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= rough) return m * mag;
  }
  return 10 * mag;
}

export function renderFigure(spec: FigureSpec, opts: ChartOptions = {}): Canvas {
  const width = opts.width ?? 640;
  const height = opts.height ?? 420;
  const canvas = new Canvas(width, height);
  const plotX0 = MARGIN.left;
  const plotX1 = width - MARGIN.right;
  const plotY0 = MARGIN.top;
  const plotY1 = height - MARGIN.bottom;

  const allM = [...new Set(spec.series.flatMap((s) => s.points.map((p) => p.M)))].sort(
    (a, b) => a - b,
  );
  if (allM.length === 0) throw new Error("figure has no points");

  const xVal = (m: number): number => (opts.logX ? Math.log10(m) : m);
  let xLo = xVal(allM[0]);
  let xHi = xVal(allM[allM.length - 1]);
  if (xHi === xLo) {
    xLo -= 1;
    xHi += 1;
  }
  const xPix = (m: number): number =>
    Math.round(plotX0 + ((xVal(m) - xLo) / (xHi - xLo)) * (plotX1 - plotX0));

  let yLo = 0;
  let yHi = 0;
  for (const s of spec.series) {
    for (const p of s.points) {
      yLo = Math.min(yLo, p.mean - p.std);
      yHi = Math.max(yHi, p.mean + p.std);
    }
  }
  if (yHi === yLo) yHi = yLo + 1;
  yHi += (yHi - yLo) * 0.05;
  const yPix = (v: number): number =>
    Math.round(plotY1 - ((v - yLo) / (yHi - yLo)) * (plotY1 - plotY0));

  // error bands under everything else
  spec.series.forEach((s, si) => {
    const band = lighten(PALETTE[si % PALETTE.length]);
    const pts = s.points.map((p) => ({
      x: xPix(p.M),
      top: yPix(p.mean + p.std),
      bot: yPix(p.mean - p.std),
    }));
    for (let i = 0; i + 1 < pts.length; i++) {
      const a = pts[i];
      const b = pts[i + 1];
      for (let x = a.x; x <= b.x; x++) {
        const t = b.x === a.x ? 0 : (x - a.x) / (b.x - a.x);
        const top = Math.round(a.top + t * (b.top - a.top));
        const bot = Math.round(a.bot + t * (b.bot - a.bot));
        canvas.fillRect(x, top, 1, Math.max(1, bot - top + 1), band);
      }
    }
  });

  // axes and ticks
  canvas.line(plotX0, plotY0, plotX0, plotY1, BLACK);
  canvas.line(plotX0, plotY1, plotX1, plotY1, BLACK);

  const yStep = niceStep(yHi - yLo, 6);
  for (let v = Math.ceil(yLo / yStep) * yStep; v <= yHi + 1e-12; v += yStep) {
    const y = yPix(v);
    canvas.line(plotX0 + 1, y, plotX1, y, GREY);
    canvas.line(plotX0 - 4, y, plotX0, y, BLACK);
    const label = formatTick(Number(v.toPrecision(10)));
    canvas.text(plotX0 - 6 - textWidth(label), y - 3, label, BLACK);
  }

  for (const m of allM) {
    const x = xPix(m);
    canvas.line(x, plotY1, x, plotY1 + 4, BLACK);
    const label = formatTick(m);
    canvas.text(x - Math.floor(textWidth(label) / 2), plotY1 + 7, label, BLACK);
  }

  // series lines with point markers
  spec.series.forEach((s, si) => {
    const color = PALETTE[si % PALETTE.length];
    const pts = s.points.map((p) => ({ x: xPix(p.M), y: yPix(p.mean) }));
    for (let i = 0; i + 1 < pts.length; i++) {
      canvas.line(pts[i].x, pts[i].y, pts[i + 1].x, pts[i + 1].y, color);
    }
    for (const p of pts) {
      canvas.fillRect(p.x - 1, p.y - 1, 3, 3, color);
    }
  });

  // legend, top right inside the plot area
  const legendW =
    Math.max(...spec.series.map((s) => textWidth(s.label))) + 18;
  let ly = plotY0 + 4;
  const lx = plotX1 - legendW - 4;
  spec.series.forEach((s, si) => {
    const color = PALETTE[si % PALETTE.length];
    canvas.fillRect(lx, ly + 2, 10, 3, color);
    canvas.text(lx + 14, ly, s.label, BLACK);
    ly += 11;
  });

  const title = `${spec.generator} ${spec.policy} ${spec.feedback}`;
  canvas.text(plotX0, 8, title, BLACK);
  canvas.text(plotX0 - 48, plotY0 - 12, "SURROGATE GAP", BLACK);
  canvas.text(
    Math.floor((plotX0 + plotX1) / 2) - Math.floor(textWidth("M") / 2),
    height - 12,
    "M",
    BLACK,
  );

  return canvas;
}
