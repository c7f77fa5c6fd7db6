/**
 * Thin Node bridge to the spanseg core. The dictionary file format and the
 * `spanseg segment` CLI are the single source of truth: segmentation results
 * are produced by the core process, never re-implemented here.
 */

import { spawnSync } from "node:child_process";
import { readFileSync } from "node:fs";

export class DictionaryFormatError extends Error {}
export class SegmentationError extends Error {}
export class HandleClosedError extends Error {}
export class AlignmentMismatchError extends Error {}

export type SpanRange = [number, number];

export interface SegmentRecord {
  tokens: string[];
  spans: SpanRange[];
}

/** Interpreter used to invoke the core CLI; override via SPANSEG_PYTHON. */
const PYTHON = process.env.SPANSEG_PYTHON ?? "python3";

function runCore(args: string[], stdin?: string): string {
  const res = spawnSync(PYTHON, ["-m", "spanseg.cli", ...args], {
    input: stdin,
    encoding: "utf-8",
    maxBuffer: 64 * 1024 * 1024,
  });
  if (res.error) {
    throw new SegmentationError(`failed to launch core CLI: ${res.error.message}`);
  }
  if (res.status !== 0) {
    // surface the core's own message text unchanged
    throw new SegmentationError(res.stderr.trim());
  }
  return res.stdout;
}

export class DictionaryHandle {
  private closed = false;

  private constructor(
    readonly path: string,
    readonly maxN: number,
    readonly minCount: number,
    private readonly entryCount: number,
  ) {}

  /** Validate the SPANDICT v1 header and wrap the file in a read-only handle. */
  static open(path: string): DictionaryHandle {
    const text = readFileSync(path, "utf-8");
    const newline = text.indexOf("\n");
    const header = newline >= 0 ? text.slice(0, newline) : text;
    const parts = header.split(" ");
    if (parts.length !== 4 || parts[0] !== "SPANDICT" || parts[1] !== "v1") {
      throw new DictionaryFormatError(
        `unsupported dictionary header or version: ${JSON.stringify(header)} (expected "SPANDICT v1 ...")`,
      );
    }
    const maxN = Number(parts[2].replace("max_n=", ""));
    const minCount = Number(parts[3].replace("min_count=", ""));
    if (!Number.isInteger(maxN) || !Number.isInteger(minCount)) {
      throw new DictionaryFormatError(`bad header fields in ${JSON.stringify(header)}`);
    }
    const entries = text
      .slice(newline + 1)
      .split("\n")
      .filter((line) => line.length > 0).length;
    return new DictionaryHandle(path, maxN, minCount, entries);
  }

  private ensureOpen(): void {
    if (this.closed) {
      throw new HandleClosedError("dictionary handle is closed");
    }
  }

  size(): number {
    this.ensureOpen();
    return this.entryCount;
  }

  close(): void {
    this.closed = true;
  }

  /** Raw JSONL bytes exactly as the core CLI emits them, one line per input. */
  segmentRaw(texts: string[]): string {
    this.ensureOpen();
    const stdin = texts.map((t) => t.replace(/\n/g, " ")).join("\n") + "\n";
    return runCore(["segment", "--dict", this.path, "--in", "-", "--out", "-"], stdin);
  }

  segmentMany(texts: string[]): SegmentRecord[] {
    return this.segmentRaw(texts)
      .split("\n")
      .filter((line) => line.length > 0)
      .map((line) => JSON.parse(line) as SegmentRecord);
  }

  segment(text: string): SegmentRecord {
    return this.segmentMany([text])[0];
  }
}

export function loadDictionary(path: string): DictionaryHandle {
  return DictionaryHandle.open(path);
}

/**
 * Map word spans onto subword index ranges, mirroring the core:
 * word range [a, b) becomes [ranges[a][0] + clsOffset, ranges[b-1][1] + clsOffset).
 */
export function projectToSubwords(
  spans: SpanRange[],
  alignmentRanges: SpanRange[],
  clsOffset: number,
): SpanRange[] {
  if (spans.length === 0) {
    throw new AlignmentMismatchError("partition must contain at least one span");
  }
  const wordCount = spans[spans.length - 1][1];
  if (wordCount !== alignmentRanges.length) {
    throw new AlignmentMismatchError(
      `partition covers ${wordCount} words, alignment describes ${alignmentRanges.length}`,
    );
  }
  return spans.map(([a, b]) => [
    alignmentRanges[a][0] + clsOffset,
    alignmentRanges[b - 1][1] + clsOffset,
  ]);
}
