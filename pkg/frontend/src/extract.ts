/**
 * Orchestration: image frames -> proposals file, enrollment photos ->
 * multi-view embedding records. Model identifiers resolve through the
 * segmenter/encoder registries; outputs are written atomically in the
 * formats the tracking toolkit reads directly.
 */

import * as fs from "fs";
import * as path from "path";

import { ExtractionConfig, validateConfig } from "./config";
import { ENCODERS } from "./embed";
import { IMAGE_EXTENSIONS, ImageDecodeError, RgbImage, loadImage } from "./image";
import {
  FormatError,
  ProposalRecord,
  mvpeText,
  proposalsText,
  validateMvpeText,
  validateProposalsText,
  writeAtomic,
} from "./formats";
import { SEGMENTERS, dedupeMasks } from "./segment";

export interface SkippedFile {
  file: string;
  reason: string;
}

export interface ExtractionResult {
  frames: number;
  proposals: number;
  skipped: SkippedFile[];
  outFile: string;
}

function isImageFile(name: string): boolean {
  return IMAGE_EXTENSIONS.includes(path.extname(name).toLowerCase());
}

/** Frame index: the last digit run in the name, else the list position. */
export function frameIndexOf(name: string, position: number): number {
  const matches = path.basename(name, path.extname(name)).match(/\d+/g);
  if (matches && matches.length > 0) {
    return parseInt(matches[matches.length - 1], 10);
  }
  return position;
}

export function listFrames(dir: string): string[] {
  const entries = fs
    .readdirSync(dir)
    .filter(isImageFile)
    .sort();
  return entries.map((name) => path.join(dir, name));
}

function segmentAndEncode(
  image: RgbImage,
  cfg: ExtractionConfig
): { bbox: [number, number, number, number]; score: number; embedding: Float64Array }[] {
  const segment = SEGMENTERS[cfg.segmenter];
  const encode = ENCODERS[cfg.encoder];
  const masks = dedupeMasks(segment(image, cfg.minArea));
  return masks.map((mask) => ({
    bbox: mask.bbox,
    score: mask.score,
    embedding: encode(image, mask.bbox, cfg.embeddingDim, cfg.cropPadding),
  }));
}

export function extractProposals(
  framesDir: string,
  outFile: string,
  cfg: ExtractionConfig
): ExtractionResult {
  validateConfig(cfg);
  const files = listFrames(framesDir);
  if (files.length === 0) {
    throw new FormatError(`no image frames (${IMAGE_EXTENSIONS.join("/")}) in ${framesDir}`);
  }
  const records: ProposalRecord[] = [];
  const skipped: SkippedFile[] = [];
  for (let start = 0; start < files.length; start += cfg.batchSize) {
    const batch = files.slice(start, start + cfg.batchSize);
    batch.forEach((file, offset) => {
      const position = start + offset;
      let image: RgbImage;
      try {
        image = loadImage(file);
      } catch (err) {
        if (err instanceof ImageDecodeError) {
          skipped.push({ file, reason: String(err.message) });
          console.warn(`warning: skipping undecodable frame ${file}: ${err.message}`);
          return;
        }
        throw err;
      }
      const frame = frameIndexOf(file, position);
      for (const p of segmentAndEncode(image, cfg)) {
        records.push({ frame, ...p });
      }
    });
  }
  const text = proposalsText(cfg.embeddingDim, records);
  validateProposalsText(text);
  writeAtomic(outFile, text);
  if (skipped.length > 0) {
    const log = skipped.map((s) => `${s.file}\t${s.reason}`).join("\n") + "\n";
    writeAtomic(outFile + ".skipped.log", log);
  }
  return { frames: files.length - skipped.length, proposals: records.length, skipped, outFile };
}

export interface EnrollmentResult {
  instances: number;
  views: number;
  skipped: SkippedFile[];
  outFile: string;
}

/**
 * Enrollment photos grouped one subdirectory per instance id; loose
 * images at the top level enroll under `defaultId`. Each photo is
 * segmented, the dominant foreground component is cropped and encoded
 * as one view; photos with no usable foreground are skipped with a
 * warning.
 */
export function embedEnrollment(
  imagesDir: string,
  outFile: string,
  cfg: ExtractionConfig,
  defaultId = "instance"
): EnrollmentResult {
  validateConfig(cfg);
  const groups = new Map<string, string[]>();
  for (const entry of fs.readdirSync(imagesDir, { withFileTypes: true })) {
    const full = path.join(imagesDir, entry.name);
    if (entry.isDirectory()) {
      const images = fs
        .readdirSync(full)
        .filter(isImageFile)
        .sort()
        .map((n) => path.join(full, n));
      if (images.length > 0) groups.set(entry.name, images);
    } else if (isImageFile(entry.name)) {
      const flat = groups.get(defaultId) ?? [];
      flat.push(full);
      groups.set(defaultId, flat);
    }
  }
  if (groups.size === 0) {
    throw new FormatError(`no enrollment images in ${imagesDir}`);
  }

  const segment = SEGMENTERS[cfg.segmenter];
  const encode = ENCODERS[cfg.encoder];
  const views = new Map<string, Float64Array[]>();
  const skipped: SkippedFile[] = [];
  let total = 0;
  for (const id of [...groups.keys()].sort()) {
    const embeddings: Float64Array[] = [];
    for (const file of groups.get(id) as string[]) {
      let image: RgbImage;
      try {
        image = loadImage(file);
      } catch (err) {
        if (err instanceof ImageDecodeError) {
          skipped.push({ file, reason: String(err.message) });
          console.warn(`warning: skipping undecodable image ${file}: ${err.message}`);
          continue;
        }
        throw err;
      }
      const masks = dedupeMasks(segment(image, cfg.minArea));
      if (masks.length === 0) {
        skipped.push({ file, reason: "segmentation found no foreground" });
        console.warn(`warning: no foreground in ${file}; image skipped`);
        continue;
      }
      const foreground = masks.reduce((a, b) => (b.area > a.area ? b : a));
      embeddings.push(encode(image, foreground.bbox, cfg.embeddingDim, cfg.cropPadding));
      total++;
    }
    if (embeddings.length > 0) views.set(id, embeddings);
  }
  const text = mvpeText(cfg.embeddingDim, views);
  validateMvpeText(text);
  writeAtomic(outFile, text);
  if (skipped.length > 0) {
    const log = skipped.map((s) => `${s.file}\t${s.reason}`).join("\n") + "\n";
    writeAtomic(outFile + ".skipped.log", log);
  }
  return { instances: views.size, views: total, skipped, outFile };
}
