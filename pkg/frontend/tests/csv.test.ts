import { describe, expect, it } from "vitest";

import { parseCsv, parseCsvRecords } from "../src/csv.js";

describe("parseCsv", () => {
  it("splits plain rows", () => {
    expect(parseCsv("a,b,c\n1,2,3\n")).toEqual([
      ["a", "b", "c"],
      ["1", "2", "3"],
    ]);
  });

  it("handles quoted commas and escaped quotes", () => {
    const text = 'id,comment\n7,"has, commas and ""quotes"""\n';
    expect(parseCsv(text)).toEqual([
      ["id", "comment"],
      ["7", 'has, commas and "quotes"'],
    ]);
  });

  it("handles newlines inside quoted fields", () => {
    const text = 'id,comment\r\n1,"line one\nline two"\r\n2,plain\r\n';
    expect(parseCsv(text)).toEqual([
      ["id", "comment"],
      ["1", "line one\nline two"],
      ["2", "plain"],
    ]);
  });

  it("keeps empty fields", () => {
    expect(parseCsv("a,,c\n,,\n")).toEqual([
      ["a", "", "c"],
      ["", "", ""],
    ]);
  });
});

describe("parseCsvRecords", () => {
  it("keys rows by header", () => {
    const records = parseCsvRecords("x,y\n1,2\n3,4\n");
    expect(records).toEqual([
      { x: "1", y: "2" },
      { x: "3", y: "4" },
    ]);
  });

  it("returns empty for empty input", () => {
    expect(parseCsvRecords("")).toEqual([]);
  });

  it("round-trips python csv.writer output", () => {
    // as produced by the service: minimal quoting, \r\n line ends
    const text = 'item_id,comment\r\nabc,"solid, minor verbosity"\r\n';
    expect(parseCsvRecords(text)).toEqual([{ item_id: "abc", comment: "solid, minor verbosity" }]);
  });
});
