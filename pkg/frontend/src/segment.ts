/**
 * Class-agnostic segmentation front ends, keyed by model identifier.
 *
 * The built-in backends are classical (thresholding plus connected
 * components) so the extractor runs anywhere without model weights;
 * heavier ONNX-style backends can register under new identifiers with
 * the same mask contract.
 */

import { RgbImage, toGray } from "./image";

export interface SegmentMask {
  /** Tight bbox, pixels: [xMin, yMin, xMax, yMax]. */
  bbox: [number, number, number, number];
  /** Confidence in [0, 1]. */
  score: number;
  /** Pixel count of the component. */
  area: number;
}

export type Segmenter = (image: RgbImage, minArea: number) => SegmentMask[];

function otsuThreshold(gray: Float64Array): number {
  const hist = new Array(256).fill(0);
  for (const g of gray) hist[Math.min(255, Math.max(0, Math.round(g)))]++;
  const total = gray.length;
  let sum = 0;
  for (let i = 0; i < 256; i++) sum += i * hist[i];
  let sumB = 0;
  let wB = 0;
  let best = 0;
  let threshold = 127;
  for (let i = 0; i < 256; i++) {
    wB += hist[i];
    if (wB === 0) continue;
    const wF = total - wB;
    if (wF === 0) break;
    sumB += i * hist[i];
    const mB = sumB / wB;
    const mF = (sum - sumB) / wF;
    const between = wB * wF * (mB - mF) * (mB - mF);
    if (between > best) {
      best = between;
      threshold = i;
    }
  }
  return threshold;
}

// Gray-level separation below this is background texture, not objects.
const CONTRAST_FLOOR = 20;

/**
 * Otsu threshold, take the minority side as foreground (objects are
 * rare against a dominant background), then 8-connected components.
 * Low-contrast splits (blank or gently shaded frames) produce nothing.
 */
function segmentOtsuComponents(image: RgbImage, minArea: number): SegmentMask[] {
  const { width, height } = image;
  const gray = toGray(image);
  const threshold = otsuThreshold(gray);
  let above = 0;
  let sumAbove = 0;
  let sumBelow = 0;
  for (const g of gray) {
    if (g > threshold) {
      above++;
      sumAbove += g;
    } else {
      sumBelow += g;
    }
  }
  const below = gray.length - above;
  if (above === 0 || below === 0) return [];
  if (sumAbove / above - sumBelow / below < CONTRAST_FLOOR) return [];
  const foregroundAbove = above <= below;

  const fg = new Uint8Array(gray.length);
  for (let i = 0; i < gray.length; i++) {
    const isAbove = gray[i] > threshold;
    fg[i] = isAbove === foregroundAbove ? 1 : 0;
  }

  const labels = new Int32Array(gray.length).fill(-1);
  const masks: SegmentMask[] = [];
  const stack: number[] = [];
  let next = 0;
  for (let start = 0; start < fg.length; start++) {
    if (!fg[start] || labels[start] >= 0) continue;
    const label = next++;
    stack.push(start);
    labels[start] = label;
    let area = 0;
    let x0 = width;
    let y0 = height;
    let x1 = -1;
    let y1 = -1;
    while (stack.length) {
      const idx = stack.pop() as number;
      const x = idx % width;
      const y = (idx - x) / width;
      area++;
      if (x < x0) x0 = x;
      if (y < y0) y0 = y;
      if (x > x1) x1 = x;
      if (y > y1) y1 = y;
      for (let dy = -1; dy <= 1; dy++) {
        for (let dx = -1; dx <= 1; dx++) {
          if (dx === 0 && dy === 0) continue;
          const nx = x + dx;
          const ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
          const nidx = ny * width + nx;
          if (fg[nidx] && labels[nidx] < 0) {
            labels[nidx] = label;
            stack.push(nidx);
          }
        }
      }
    }
    if (area < minArea) continue;
    const bboxArea = (x1 - x0 + 1) * (y1 - y0 + 1);
    masks.push({
      bbox: [x0, y0, x1 + 1, y1 + 1],
      score: Math.min(1, area / bboxArea), // solidity of the component
      area,
    });
  }
  return masks;
}

/** Fixed sliding grid, for images where thresholding finds nothing. */
function segmentGrid(image: RgbImage, minArea: number): SegmentMask[] {
  const masks: SegmentMask[] = [];
  const step = Math.max(16, Math.floor(Math.min(image.width, image.height) / 4));
  for (let y = 0; y + step <= image.height; y += step) {
    for (let x = 0; x + step <= image.width; x += step) {
      if (step * step < minArea) continue;
      masks.push({ bbox: [x, y, x + step, y + step], score: 0.5, area: step * step });
    }
  }
  return masks;
}

export const SEGMENTERS: Record<string, Segmenter> = {
  "cc-otsu": segmentOtsuComponents,
  grid: segmentGrid,
};

export function bboxIou(
  a: [number, number, number, number],
  b: [number, number, number, number]
): number {
  const ix0 = Math.max(a[0], b[0]);
  const iy0 = Math.max(a[1], b[1]);
  const ix1 = Math.min(a[2], b[2]);
  const iy1 = Math.min(a[3], b[3]);
  const iw = Math.max(0, ix1 - ix0);
  const ih = Math.max(0, iy1 - iy0);
  const inter = iw * ih;
  if (inter === 0) return 0;
  const union =
    (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter;
  return inter / union;
}

/** Drop near-duplicate masks (IoU > 0.9), keeping the higher score. */
export function dedupeMasks(masks: SegmentMask[], iouLimit = 0.9): SegmentMask[] {
  const sorted = [...masks].sort(
    (a, b) => b.score - a.score || a.bbox[0] - b.bbox[0] || a.bbox[1] - b.bbox[1]
  );
  const kept: SegmentMask[] = [];
  for (const mask of sorted) {
    if (kept.every((other) => bboxIou(mask.bbox, other.bbox) <= iouLimit)) {
      kept.push(mask);
    }
  }
  // Stable output order: by position, not by score.
  return kept.sort(
    (a, b) => a.bbox[0] - b.bbox[0] || a.bbox[1] - b.bbox[1] || a.bbox[2] - b.bbox[2]
  );
}
