/** Extraction configuration and validation. */

import { ENCODERS } from "./embed";
import { SEGMENTERS } from "./segment";

export interface ExtractionConfig {
  segmenter: string;
  encoder: string;
  embeddingDim: number;
  cropPadding: number;
  minArea: number;
  batchSize: number;
  device: string;
}

export const DEFAULT_CONFIG: ExtractionConfig = {
  segmenter: "cc-otsu",
  encoder: "patch-gradient",
  embeddingDim: 64,
  cropPadding: 0.1,
  minArea: 40,
  batchSize: 8,
  device: "cpu",
};

export class ConfigError extends Error {}

export function validateConfig(cfg: ExtractionConfig): ExtractionConfig {
  if (!(cfg.segmenter in SEGMENTERS)) {
    throw new ConfigError(
      `unknown segmenter ${JSON.stringify(cfg.segmenter)}; ` +
        `known: ${Object.keys(SEGMENTERS).join(", ")}`
    );
  }
  if (!(cfg.encoder in ENCODERS)) {
    throw new ConfigError(
      `unknown encoder ${JSON.stringify(cfg.encoder)}; ` +
        `known: ${Object.keys(ENCODERS).join(", ")}`
    );
  }
  if (!Number.isInteger(cfg.embeddingDim) || cfg.embeddingDim < 2) {
    throw new ConfigError(`embedding dimension must be an integer >= 2, got ${cfg.embeddingDim}`);
  }
  if (!(cfg.cropPadding >= 0)) {
    throw new ConfigError(`crop padding ratio must be >= 0, got ${cfg.cropPadding}`);
  }
  if (!Number.isInteger(cfg.minArea) || cfg.minArea < 1) {
    throw new ConfigError(`min component area must be >= 1, got ${cfg.minArea}`);
  }
  if (!Number.isInteger(cfg.batchSize) || cfg.batchSize < 1) {
    throw new ConfigError(`batch size must be >= 1, got ${cfg.batchSize}`);
  }
  if (cfg.device !== "cpu") {
    throw new ConfigError(`the built-in backends only support device "cpu", got ${cfg.device}`);
  }
  return cfg;
}
