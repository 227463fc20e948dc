// End-to-end replay against the real Python service: type "medicine" under
// the combined service, pick the alternative-section suggestion, submit,
// then check the server-side log and its classification.

import { ChildProcess, spawn, spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import path from "node:path";
import { fileURLToPath } from "node:url";

import { afterAll, beforeAll, expect, test } from "vitest";

import { ApiClient } from "../src/api.js";
import { SearchController } from "../src/controller.js";

const here = path.dirname(fileURLToPath(import.meta.url));
const demoDir = path.resolve(here, "../../demo");
const PORT = 8891;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let workDir: string;
let logPath: string;
let configPath: string;

async function waitForServer(): Promise<void> {
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const response = await fetch(`${BASE}/session`);
      if (response.ok) {
        return;
      }
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      throw new Error("service did not come up on " + BASE);
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
}

beforeAll(async () => {
  workDir = mkdtempSync(path.join(tmpdir(), "termsuggest-ui-"));
  logPath = path.join(workDir, "events.log");
  configPath = path.join(workDir, "replay.conf");
  writeFileSync(
    configPath,
    [
      "active_service = CTS",
      `ust_vocabulary = ${path.join(demoDir, "vocabulary_ust.tsv")}`,
      `thesaurus = ${path.join(demoDir, "thesaurus.tsv")}`,
      `concordance = ${path.join(demoDir, "concordance.tsv")}`,
      `corpus = ${path.join(demoDir, "corpus.jsonl")}`,
      `log_path = ${logPath}`,
      `listen = 127.0.0.1:${PORT}`,
      "",
    ].join("\n")
  );
  server = spawn(
    "python3",
    ["-m", "termsuggest.service.cli", "serve", "--config", configPath],
    { stdio: "ignore" }
  );
  await waitForServer();
}, 60_000);

afterAll(() => {
  server?.kill();
});

function readLogRecords(): Array<Record<string, unknown>> {
  const raw = readFileSync(logPath, "utf-8").trim();
  return raw === "" ? [] : raw.split("\n").map((line) => JSON.parse(line));
}

test("alternative-section pick flows through to a category-7 log record", async () => {
  const controller = new SearchController(new ApiClient(BASE), { debounceMs: 5 });
  await controller.start();

  // type the word one keystroke at a time
  const word = "medicine";
  for (let i = 1; i <= word.length; i += 1) {
    controller.handleInput(word.slice(0, i));
  }
  await controller.queryNow();

  const alternative = controller.section("alternative");
  expect(alternative.length).toBeGreaterThan(0);
  const target = alternative.find((i) => i.term === "Doctor-patient-relationship");
  expect(target).toBeDefined();
  const index = controller.state.suggestions.indexOf(target!);

  await controller.selectIndex(index);
  expect(controller.state.input).toBe("Doctor-patient-relationship");
  await controller.submit();
  expect(controller.state.resultCount).not.toBeNull();

  const selections = readLogRecords().filter((r) => r.kind === "selection");
  expect(selections).toHaveLength(1);
  expect(selections[0]).toMatchObject({
    entered_term: "medicine",
    chosen_term: "Doctor-patient-relationship",
    position: target!.position,
    section: "alternative",
    service_type: "CTS",
  });
  const searches = readLogRecords().filter((r) => r.kind === "search");
  expect(searches).toHaveLength(1);
  expect(searches[0]).toMatchObject({
    submitted_term: "Doctor-patient-relationship",
  });

  // server-side classification of the logged pick
  const report = spawnSync(
    "python3",
    ["-m", "termsuggest.service.cli", "report", "--config", configPath],
    { encoding: "utf-8" }
  );
  expect(report.status).toBe(0);
  const c7 = report.stdout
    .split("\n")
    .find((line) => line.startsWith("C7"));
  expect(c7).toBeDefined();
  expect(c7).toMatch(/C7\s+1\s+100\.00\s+0\.00\s+100\.00/);
});

test("every selection yields exactly one record with matching rank and section", async () => {
  const before = readLogRecords().filter((r) => r.kind === "selection").length;
  const controller = new SearchController(new ApiClient(BASE), { debounceMs: 5 });
  await controller.start();
  controller.handleInput("acci");
  await controller.queryNow();
  const picks = controller.state.suggestions;
  expect(picks.length).toBeGreaterThanOrEqual(2);

  await controller.selectIndex(1);
  const selections = readLogRecords().filter((r) => r.kind === "selection");
  expect(selections).toHaveLength(before + 1);
  const latest = selections[selections.length - 1];
  expect(latest).toMatchObject({
    entered_term: "acci",
    chosen_term: picks[1].term,
    position: picks[1].position,
    section: picks[1].section,
  });
});
