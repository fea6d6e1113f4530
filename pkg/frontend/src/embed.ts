/**
 * Appearance encoders, keyed by model identifier. Crops are padded,
 * resampled to a fixed grid, turned into intensity + gradient + color
 * features, then projected to the configured dimension and normalized
 * to unit L2 length. Identical crops always produce identical
 * embeddings (no randomness at inference time; the projection matrix
 * is derived from a fixed seed).
 */

import { RgbImage, toGray } from "./image";

export type Encoder = (image: RgbImage, bbox: [number, number, number, number],
                       dim: number, paddingRatio: number) => Float64Array;

const PATCH = 12; // resampled crop side

function bilinearSample(gray: Float64Array, width: number, height: number,
                        x: number, y: number): number {
  const cx = Math.min(Math.max(x, 0), width - 1);
  const cy = Math.min(Math.max(y, 0), height - 1);
  const x0 = Math.floor(cx);
  const y0 = Math.floor(cy);
  const x1 = Math.min(x0 + 1, width - 1);
  const y1 = Math.min(y0 + 1, height - 1);
  const fx = cx - x0;
  const fy = cy - y0;
  return (
    gray[y0 * width + x0] * (1 - fx) * (1 - fy) +
    gray[y0 * width + x1] * fx * (1 - fy) +
    gray[y1 * width + x0] * (1 - fx) * fy +
    gray[y1 * width + x1] * fx * fy
  );
}

function paddedBox(bbox: [number, number, number, number], ratio: number,
                   width: number, height: number): [number, number, number, number] {
  const w = bbox[2] - bbox[0];
  const h = bbox[3] - bbox[1];
  const px = w * ratio;
  const py = h * ratio;
  return [
    Math.max(0, bbox[0] - px),
    Math.max(0, bbox[1] - py),
    Math.min(width, bbox[2] + px),
    Math.min(height, bbox[3] + py),
  ];
}

/** Raw features: 12x12 normalized intensities, 8-bin gradient
 * orientation histogram, 3x8 color histograms. */
function cropFeatures(image: RgbImage, bbox: [number, number, number, number],
                      paddingRatio: number): Float64Array {
  const [x0, y0, x1, y1] = paddedBox(bbox, paddingRatio, image.width, image.height);
  const gray = toGray(image);
  const patch = new Float64Array(PATCH * PATCH);
  for (let py = 0; py < PATCH; py++) {
    for (let px = 0; px < PATCH; px++) {
      const sx = x0 + ((px + 0.5) / PATCH) * (x1 - x0);
      const sy = y0 + ((py + 0.5) / PATCH) * (y1 - y0);
      patch[py * PATCH + px] = bilinearSample(gray, image.width, image.height, sx, sy);
    }
  }
  // Contrast-normalize the intensity block.
  let mean = 0;
  for (const v of patch) mean += v;
  mean /= patch.length;
  let variance = 0;
  for (const v of patch) variance += (v - mean) * (v - mean);
  const std = Math.sqrt(variance / patch.length) + 1e-6;

  const orientationBins = 8;
  const orientation = new Float64Array(orientationBins);
  for (let py = 1; py < PATCH - 1; py++) {
    for (let px = 1; px < PATCH - 1; px++) {
      const gx = patch[py * PATCH + px + 1] - patch[py * PATCH + px - 1];
      const gy = patch[(py + 1) * PATCH + px] - patch[(py - 1) * PATCH + px];
      const magnitude = Math.hypot(gx, gy);
      if (magnitude < 1e-9) continue;
      let angle = Math.atan2(gy, gx); // [-pi, pi]
      if (angle < 0) angle += Math.PI;
      let bin = Math.floor((angle / Math.PI) * orientationBins);
      if (bin === orientationBins) bin = orientationBins - 1;
      orientation[bin] += magnitude;
    }
  }

  const colorBins = 8;
  const color = new Float64Array(3 * colorBins);
  const cx0 = Math.floor(x0);
  const cy0 = Math.floor(y0);
  const cx1 = Math.max(cx0 + 1, Math.ceil(x1));
  const cy1 = Math.max(cy0 + 1, Math.ceil(y1));
  let pixels = 0;
  for (let y = cy0; y < Math.min(cy1, image.height); y++) {
    for (let x = cx0; x < Math.min(cx1, image.width); x++) {
      const i = y * image.width + x;
      for (let c = 0; c < 3; c++) {
        let bin = Math.floor((image.data[3 * i + c] / 256) * colorBins);
        if (bin === colorBins) bin = colorBins - 1;
        color[c * colorBins + bin]++;
      }
      pixels++;
    }
  }

  const features = new Float64Array(patch.length + orientationBins + 3 * colorBins);
  for (let i = 0; i < patch.length; i++) features[i] = (patch[i] - mean) / std;
  let orientationTotal = 0;
  for (const v of orientation) orientationTotal += v;
  for (let i = 0; i < orientationBins; i++) {
    features[patch.length + i] =
      orientationTotal > 0 ? (orientation[i] / orientationTotal) * PATCH : 0;
  }
  for (let i = 0; i < 3 * colorBins; i++) {
    features[patch.length + orientationBins + i] =
      pixels > 0 ? (color[i] / pixels) * PATCH : 0;
  }
  return features;
}

/** Tiny deterministic PRNG for the projection matrix (fixed seed). */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

const projectionCache = new Map<string, Float64Array>();

function projectionMatrix(rows: number, cols: number): Float64Array {
  const key = `${rows}x${cols}`;
  let m = projectionCache.get(key);
  if (!m) {
    const rand = mulberry32(0xe17ac7);
    m = new Float64Array(rows * cols);
    for (let i = 0; i < m.length; i++) {
      // Box-Muller from the fixed stream.
      const u = Math.max(rand(), 1e-12);
      const v = rand();
      m[i] = Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
    }
    projectionCache.set(key, m);
  }
  return m;
}

function normalize(vec: Float64Array): Float64Array {
  let norm = 0;
  for (const v of vec) norm += v * v;
  norm = Math.sqrt(norm);
  if (norm < 1e-12) {
    // Degenerate crop (all-flat black): fall back to a fixed axis so
    // the output still satisfies the unit-norm contract.
    const out = new Float64Array(vec.length);
    out[0] = 1;
    return out;
  }
  const out = new Float64Array(vec.length);
  for (let i = 0; i < vec.length; i++) out[i] = vec[i] / norm;
  return out;
}

const encodePatchGradient: Encoder = (image, bbox, dim, paddingRatio) => {
  const features = cropFeatures(image, bbox, paddingRatio);
  const projection = projectionMatrix(dim, features.length);
  const out = new Float64Array(dim);
  for (let r = 0; r < dim; r++) {
    let acc = 0;
    for (let c = 0; c < features.length; c++) {
      acc += projection[r * features.length + c] * features[c];
    }
    out[r] = acc;
  }
  return normalize(out);
};

export const ENCODERS: Record<string, Encoder> = {
  "patch-gradient": encodePatchGradient,
};
