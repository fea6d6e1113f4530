/**
 * Writers (and structural validators) for the text formats the
 * tracking toolkit consumes:
 *
 *   proposals:  `dim D` header, then `frame x0 y0 x1 y1 score e1..eD`
 *   enrollment: `dim D` header, then `view id e1..eD`
 *
 * ASCII, whitespace separated, `#` comments, floats in shortest
 * round-trip form. Embeddings must carry L2 norm within [0.99, 1.01].
 */

import * as fs from "fs";
import * as path from "path";

export class FormatError extends Error {}

export interface ProposalRecord {
  frame: number;
  bbox: [number, number, number, number];
  score: number;
  embedding: Float64Array;
}

function fmt(x: number): string {
  if (!Number.isFinite(x)) throw new FormatError(`non-finite value ${x}`);
  return String(x);
}

function checkEmbedding(embedding: Float64Array, dim: number): void {
  if (embedding.length !== dim) {
    throw new FormatError(`embedding has ${embedding.length} values, header says ${dim}`);
  }
  let norm = 0;
  for (const v of embedding) norm += v * v;
  norm = Math.sqrt(norm);
  if (norm < 0.99 || norm > 1.01) {
    throw new FormatError(`embedding norm ${norm.toFixed(4)} outside [0.99, 1.01]`);
  }
}

export function proposalsText(dim: number, records: ProposalRecord[]): string {
  const lines = [
    "# proposals: frame x_min y_min x_max y_max score embedding...",
    `dim ${dim}`,
  ];
  const sorted = [...records].sort((a, b) => a.frame - b.frame);
  for (const r of sorted) {
    checkEmbedding(r.embedding, dim);
    if (!(r.bbox[0] < r.bbox[2] && r.bbox[1] < r.bbox[3])) {
      throw new FormatError(`degenerate bbox ${r.bbox}`);
    }
    if (r.score < 0 || r.score > 1) {
      throw new FormatError(`score ${r.score} outside [0, 1]`);
    }
    const fields = [
      String(r.frame),
      ...r.bbox.map(fmt),
      fmt(r.score),
      ...Array.from(r.embedding, fmt),
    ];
    lines.push(fields.join(" "));
  }
  return lines.join("\n") + "\n";
}

export function mvpeText(dim: number, views: Map<string, Float64Array[]>): string {
  const lines = [
    "# multi-view pre-enrollment: `view id e1..eD` or `view_path id path`",
    `dim ${dim}`,
  ];
  for (const id of [...views.keys()].sort()) {
    for (const emb of views.get(id) as Float64Array[]) {
      checkEmbedding(emb, dim);
      lines.push(`view ${id} ${Array.from(emb, fmt).join(" ")}`);
    }
  }
  return lines.join("\n") + "\n";
}

export function writeAtomic(file: string, text: string): void {
  const dir = path.dirname(file);
  fs.mkdirSync(dir, { recursive: true });
  const tmp = path.join(dir, `.${path.basename(file)}.${process.pid}.tmp`);
  fs.writeFileSync(tmp, text, "utf-8");
  fs.renameSync(tmp, file);
}

// ---------------------------------------------------------------------------
// Validators: re-parse what was written, mirroring the consumer grammar.

function tokenizedLines(text: string): [number, string[]][] {
  const out: [number, string[]][] = [];
  text.split("\n").forEach((raw, idx) => {
    const line = raw.split("#", 1)[0].trim();
    if (!line) return;
    out.push([idx + 1, line.split(/\s+/)]);
  });
  return out;
}

function parseFiniteFloat(token: string, what: string, lineno: number): number {
  const value = Number(token);
  if (!Number.isFinite(value) || token.trim() === "") {
    throw new FormatError(`line ${lineno}: bad ${what} ${JSON.stringify(token)}`);
  }
  return value;
}

function parseHeaderDim(rows: [number, string[]][]): number {
  if (rows.length === 0) throw new FormatError("empty file");
  const [lineno, toks] = rows[0];
  if (toks.length !== 2 || toks[0] !== "dim") {
    throw new FormatError(`line ${lineno}: first record must be \`dim <dimension>\``);
  }
  const dim = Number(toks[1]);
  if (!Number.isInteger(dim) || dim < 1) {
    throw new FormatError(`line ${lineno}: bad dimension ${toks[1]}`);
  }
  return dim;
}

/** Throws FormatError unless the text is a valid proposals file. */
export function validateProposalsText(text: string): number {
  const rows = tokenizedLines(text);
  const dim = parseHeaderDim(rows);
  let count = 0;
  for (const [lineno, toks] of rows.slice(1)) {
    if (toks.length !== 6 + dim) {
      throw new FormatError(
        `line ${lineno}: expected ${6 + dim} fields for dim ${dim}, got ${toks.length}`
      );
    }
    const frame = Number(toks[0]);
    if (!Number.isInteger(frame) || frame < 0) {
      throw new FormatError(`line ${lineno}: bad frame ${toks[0]}`);
    }
    const bbox = toks.slice(1, 5).map((t) => parseFiniteFloat(t, "bbox", lineno));
    if (!(bbox[0] < bbox[2] && bbox[1] < bbox[3])) {
      throw new FormatError(`line ${lineno}: degenerate bbox`);
    }
    const score = parseFiniteFloat(toks[5], "score", lineno);
    if (score < 0 || score > 1) {
      throw new FormatError(`line ${lineno}: score ${score} outside [0, 1]`);
    }
    let norm = 0;
    for (const t of toks.slice(6)) {
      const v = parseFiniteFloat(t, "embedding value", lineno);
      norm += v * v;
    }
    norm = Math.sqrt(norm);
    if (norm < 0.99 || norm > 1.01) {
      throw new FormatError(`line ${lineno}: embedding norm ${norm.toFixed(4)}`);
    }
    count++;
  }
  return count;
}

/** Throws FormatError unless the text is a valid enrollment file. */
export function validateMvpeText(text: string): number {
  const rows = tokenizedLines(text);
  const dim = parseHeaderDim(rows);
  let count = 0;
  for (const [lineno, toks] of rows.slice(1)) {
    if (toks[0] === "view_path") {
      if (toks.length !== 3) throw new FormatError(`line ${lineno}: bad view_path record`);
      continue;
    }
    if (toks[0] !== "view" || toks.length !== 2 + dim) {
      throw new FormatError(`line ${lineno}: expected \`view id\` plus ${dim} values`);
    }
    let norm = 0;
    for (const t of toks.slice(2)) {
      const v = parseFiniteFloat(t, "embedding value", lineno);
      norm += v * v;
    }
    norm = Math.sqrt(norm);
    if (norm < 0.99 || norm > 1.01) {
      throw new FormatError(`line ${lineno}: embedding norm ${norm.toFixed(4)}`);
    }
    count++;
  }
  return count;
}
