/** Deterministic synthetic frames: bright blobs on a dark background. */

import { RgbImage } from "../src/image";

export interface Blob {
  cx: number;
  cy: number;
  r: number;
  color: [number, number, number];
}

export function syntheticFrame(
  width: number,
  height: number,
  blobs: Blob[]
): RgbImage {
  const data = new Uint8Array(width * height * 3);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const i = y * width + x;
      // Dark background with a mild horizontal gradient.
      const bg = 30 + Math.floor((20 * x) / width);
      data[3 * i] = bg;
      data[3 * i + 1] = bg;
      data[3 * i + 2] = bg;
      for (const blob of blobs) {
        const dx = x - blob.cx;
        const dy = y - blob.cy;
        if (dx * dx + dy * dy <= blob.r * blob.r) {
          data[3 * i] = blob.color[0];
          data[3 * i + 1] = blob.color[1];
          data[3 * i + 2] = blob.color[2];
        }
      }
    }
  }
  return { width, height, data };
}

/** A 10-frame sequence: two blobs, one drifting, one stationary. */
export function frameSequence(count = 10): RgbImage[] {
  const frames: RgbImage[] = [];
  for (let t = 0; t < count; t++) {
    frames.push(
      syntheticFrame(96, 72, [
        { cx: 20 + 2 * t, cy: 30, r: 7, color: [220, 80, 60] },
        { cx: 70, cy: 45, r: 9, color: [90, 200, 230] },
      ])
    );
  }
  return frames;
}
