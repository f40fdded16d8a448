import { parseArgs } from "node:util";

import { DataError } from "./errors.js";
import { FIGURE_KINDS, FigureKind, render } from "./render.js";

const USAGE =
  "usage: plotkit --manifest PATH --figure KIND --out PATH [--title TEXT] [--timestamp-footer]\n" +
  `  KIND: ${FIGURE_KINDS.join(" | ")}`;

export function main(argv: string[]): number {
  let values: {
    manifest?: string;
    figure?: string;
    out?: string;
    title?: string;
    "timestamp-footer"?: boolean;
  };
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        manifest: { type: "string" },
        figure: { type: "string" },
        out: { type: "string" },
        title: { type: "string" },
        "timestamp-footer": { type: "boolean" },
      },
      allowPositionals: false,
    }));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    console.error(USAGE);
    return 2;
  }
  const { manifest, figure, out } = values;
  if (!manifest || !figure || !out) {
    console.error(USAGE);
    return 2;
  }
  if (!(FIGURE_KINDS as string[]).includes(figure)) {
    console.error(`error: unknown figure kind "${figure}"; expected one of: ${FIGURE_KINDS.join(", ")}`);
    return 2;
  }
  try {
    render({
      kind: figure as FigureKind,
      manifestPath: manifest,
      outPath: out,
      title: values.title,
      timestampFooter: values["timestamp-footer"] ?? false,
    });
  } catch (err) {
    if (err instanceof DataError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    console.error(`error: ${(err as Error).stack ?? String(err)}`);
    return 1;
  }
  return 0;
}
