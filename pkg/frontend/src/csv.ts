/**
 * Minimal RFC 4180 CSV reader for the admin export.
 *
 * Handles quoted fields, escaped double quotes, and embedded commas and
 * newlines. Kept dependency-free so the built modules load in a browser
 * without a bundler.
 */

import type { ExportRow } from "./types.js";

export function parseCsv(text: string): string[][] {
  const rows: string[][] = [];
  let row: string[] = [];
  let field = "";
  let inQuotes = false;
  let i = 0;
  const pushField = () => {
    row.push(field);
    field = "";
  };
  const pushRow = () => {
    pushField();
    rows.push(row);
    row = [];
  };
  while (i < text.length) {
    const ch = text[i]!;
    if (inQuotes) {
      if (ch === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i += 2;
          continue;
        }
        inQuotes = false;
        i += 1;
        continue;
      }
      field += ch;
      i += 1;
      continue;
    }
    if (ch === '"') {
      inQuotes = true;
      i += 1;
    } else if (ch === ",") {
      pushField();
      i += 1;
    } else if (ch === "\r" && text[i + 1] === "\n") {
      pushRow();
      i += 2;
    } else if (ch === "\n" || ch === "\r") {
      pushRow();
      i += 1;
    } else {
      field += ch;
      i += 1;
    }
  }
  if (field.length > 0 || row.length > 0) {
    pushRow();
  }
  return rows;
}

/** Parse a CSV with a header line into keyed records. */
export function parseCsvRecords(text: string): ExportRow[] {
  const rows = parseCsv(text);
  const header = rows[0];
  if (!header) return [];
  return rows.slice(1).map((cells) => {
    const record: ExportRow = {};
    header.forEach((name, index) => {
      record[name] = cells[index] ?? "";
    });
    return record;
  });
}
