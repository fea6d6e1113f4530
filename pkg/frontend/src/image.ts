/**
 * Image loading. Binary PPM/PGM (P6/P5) decode ships built in; PNG is
 * handled through pngjs when it is installed. Everything downstream
 * works on a simple planar RGB buffer.
 */

import * as fs from "fs";
import * as path from "path";

export interface RgbImage {
  width: number;
  height: number;
  /** Row-major RGB, 3 bytes per pixel. */
  data: Uint8Array;
}

export class ImageDecodeError extends Error {}

function decodePnm(buf: Buffer): RgbImage {
  const magic = buf.subarray(0, 2).toString("ascii");
  if (magic !== "P6" && magic !== "P5") {
    throw new ImageDecodeError(`unsupported PNM magic ${JSON.stringify(magic)}`);
  }
  // Header: magic, width, height, maxval, separated by whitespace and
  // optional # comments, then a single whitespace byte before pixels.
  let pos = 2;
  const fields: number[] = [];
  while (fields.length < 3) {
    if (pos >= buf.length) throw new ImageDecodeError("truncated PNM header");
    const c = String.fromCharCode(buf[pos]);
    if (c === "#") {
      while (pos < buf.length && buf[pos] !== 0x0a) pos++;
      pos++;
    } else if (/\s/.test(c)) {
      pos++;
    } else {
      let token = "";
      while (pos < buf.length && !/\s/.test(String.fromCharCode(buf[pos]))) {
        token += String.fromCharCode(buf[pos]);
        pos++;
      }
      const value = Number(token);
      if (!Number.isInteger(value) || value <= 0) {
        throw new ImageDecodeError(`bad PNM header token ${JSON.stringify(token)}`);
      }
      fields.push(value);
    }
  }
  pos++; // the single whitespace after maxval
  const [width, height, maxval] = fields;
  if (maxval > 255) throw new ImageDecodeError("16-bit PNM not supported");
  const channels = magic === "P6" ? 3 : 1;
  const need = width * height * channels;
  if (buf.length - pos < need) {
    throw new ImageDecodeError(
      `PNM payload is ${buf.length - pos} bytes, expected ${need}`
    );
  }
  const data = new Uint8Array(width * height * 3);
  for (let i = 0; i < width * height; i++) {
    if (channels === 3) {
      data[3 * i] = buf[pos + 3 * i];
      data[3 * i + 1] = buf[pos + 3 * i + 1];
      data[3 * i + 2] = buf[pos + 3 * i + 2];
    } else {
      const g = buf[pos + i];
      data[3 * i] = g;
      data[3 * i + 1] = g;
      data[3 * i + 2] = g;
    }
  }
  return { width, height, data };
}

function decodePng(buf: Buffer): RgbImage {
  let PNG: any;
  try {
    // eslint-disable-next-line @typescript-eslint/no-var-requires
    PNG = require("pngjs").PNG;
  } catch {
    throw new ImageDecodeError("PNG support needs the pngjs package");
  }
  const png = PNG.sync.read(buf);
  const data = new Uint8Array(png.width * png.height * 3);
  for (let i = 0; i < png.width * png.height; i++) {
    data[3 * i] = png.data[4 * i];
    data[3 * i + 1] = png.data[4 * i + 1];
    data[3 * i + 2] = png.data[4 * i + 2];
  }
  return { width: png.width, height: png.height, data };
}

export const IMAGE_EXTENSIONS = [".ppm", ".pgm", ".png"];

export function loadImage(file: string): RgbImage {
  let buf: Buffer;
  try {
    buf = fs.readFileSync(file);
  } catch (err) {
    throw new ImageDecodeError(`cannot read ${file}: ${err}`);
  }
  const ext = path.extname(file).toLowerCase();
  if (ext === ".ppm" || ext === ".pgm") return decodePnm(buf);
  if (ext === ".png") return decodePng(buf);
  // Sniff unknown extensions.
  if (buf.length >= 2 && buf[0] === 0x50 && (buf[1] === 0x35 || buf[1] === 0x36)) {
    return decodePnm(buf);
  }
  if (buf.length >= 8 && buf[0] === 0x89 && buf[1] === 0x50) {
    return decodePng(buf);
  }
  throw new ImageDecodeError(`unsupported image format: ${file}`);
}

export function toGray(image: RgbImage): Float64Array {
  const gray = new Float64Array(image.width * image.height);
  for (let i = 0; i < gray.length; i++) {
    gray[i] =
      0.299 * image.data[3 * i] +
      0.587 * image.data[3 * i + 1] +
      0.114 * image.data[3 * i + 2];
  }
  return gray;
}

/** Write a binary P6 image (used by tests and fixtures). */
export function writePpm(file: string, image: RgbImage): void {
  const header = Buffer.from(`P6\n${image.width} ${image.height}\n255\n`, "ascii");
  fs.writeFileSync(file, Buffer.concat([header, Buffer.from(image.data)]));
}
