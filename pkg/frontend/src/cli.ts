/**
 * Command line:
 *
 *   extract --frames DIR --out FILE [model flags]
 *   enroll  --images DIR --out FILE [--id NAME] [model flags]
 *
 * Model flags: --segmenter, --encoder, --dim, --padding, --min-area,
 * --batch, --device.
 */

import { ConfigError, DEFAULT_CONFIG, ExtractionConfig } from "./config";
import { embedEnrollment, extractProposals } from "./extract";
import { FormatError } from "./formats";
import { ImageDecodeError } from "./image";

const USAGE = `usage:
  extract --frames DIR --out FILE [model flags]
  enroll  --images DIR --out FILE [--id NAME] [model flags]

model flags (defaults in parentheses):
  --segmenter NAME   segmentation backend (${DEFAULT_CONFIG.segmenter})
  --encoder NAME     appearance encoder (${DEFAULT_CONFIG.encoder})
  --dim N            embedding dimension (${DEFAULT_CONFIG.embeddingDim})
  --padding RATIO    crop padding ratio (${DEFAULT_CONFIG.cropPadding})
  --min-area N       minimum component area in px (${DEFAULT_CONFIG.minArea})
  --batch N          frames per batch (${DEFAULT_CONFIG.batchSize})
  --device NAME      compute device (${DEFAULT_CONFIG.device})
`;

class UsageError extends Error {}

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new UsageError(`unexpected argument ${arg}`);
    const value = argv[i + 1];
    if (value === undefined || value.startsWith("--")) {
      throw new UsageError(`flag ${arg} needs a value`);
    }
    flags.set(arg.slice(2), value);
    i++;
  }
  return flags;
}

function intFlag(flags: Map<string, string>, name: string, fallback: number): number {
  const raw = flags.get(name);
  if (raw === undefined) return fallback;
  const value = Number(raw);
  if (!Number.isInteger(value)) throw new UsageError(`--${name} must be an integer`);
  return value;
}

function floatFlag(flags: Map<string, string>, name: string, fallback: number): number {
  const raw = flags.get(name);
  if (raw === undefined) return fallback;
  const value = Number(raw);
  if (!Number.isFinite(value)) throw new UsageError(`--${name} must be a number`);
  return value;
}

function configFrom(flags: Map<string, string>): ExtractionConfig {
  return {
    segmenter: flags.get("segmenter") ?? DEFAULT_CONFIG.segmenter,
    encoder: flags.get("encoder") ?? DEFAULT_CONFIG.encoder,
    embeddingDim: intFlag(flags, "dim", DEFAULT_CONFIG.embeddingDim),
    cropPadding: floatFlag(flags, "padding", DEFAULT_CONFIG.cropPadding),
    minArea: intFlag(flags, "min-area", DEFAULT_CONFIG.minArea),
    batchSize: intFlag(flags, "batch", DEFAULT_CONFIG.batchSize),
    device: flags.get("device") ?? DEFAULT_CONFIG.device,
  };
}

const KNOWN_FLAGS = new Set([
  "frames", "images", "out", "id",
  "segmenter", "encoder", "dim", "padding", "min-area", "batch", "device",
]);

export function main(argv: string[]): number {
  try {
    const [command, ...rest] = argv;
    if (command === "--help" || command === "-h" || command === undefined) {
      process.stdout.write(USAGE);
      return command === undefined ? 2 : 0;
    }
    const flags = parseFlags(rest);
    for (const name of flags.keys()) {
      if (!KNOWN_FLAGS.has(name)) throw new UsageError(`unknown flag --${name}`);
    }
    const cfg = configFrom(flags);
    const out = flags.get("out");
    if (!out) throw new UsageError("--out FILE is required");

    if (command === "extract") {
      const frames = flags.get("frames");
      if (!frames) throw new UsageError("extract needs --frames DIR");
      const result = extractProposals(frames, out, cfg);
      process.stdout.write(
        `wrote ${result.proposals} proposals over ${result.frames} frames to ${result.outFile}` +
          (result.skipped.length ? ` (${result.skipped.length} frames skipped)` : "") +
          "\n"
      );
      return 0;
    }
    if (command === "enroll") {
      const images = flags.get("images");
      if (!images) throw new UsageError("enroll needs --images DIR");
      const result = embedEnrollment(images, out, cfg, flags.get("id") ?? "instance");
      process.stdout.write(
        `wrote ${result.views} views for ${result.instances} instances to ${result.outFile}` +
          (result.skipped.length ? ` (${result.skipped.length} images skipped)` : "") +
          "\n"
      );
      return 0;
    }
    throw new UsageError(`unknown command ${JSON.stringify(command)}`);
  } catch (err) {
    if (err instanceof UsageError) {
      process.stderr.write(`error: ${err.message}\n\n${USAGE}`);
      return 2;
    }
    if (
      err instanceof ConfigError ||
      err instanceof FormatError ||
      err instanceof ImageDecodeError ||
      (err as NodeJS.ErrnoException)?.code !== undefined
    ) {
      process.stderr.write(`error: ${(err as Error).message}\n`);
      return 1;
    }
    throw err;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
