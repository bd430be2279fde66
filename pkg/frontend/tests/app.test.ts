import { beforeEach, describe, expect, it } from "vitest";
import { mount } from "../src/main.js";
import { FixtureServer, installFetch } from "./server.js";

let server: FixtureServer;
let root: HTMLElement;

beforeEach(() => {
  server = installFetch();
  document.body.innerHTML = "<div id='host'></div>";
  root = document.getElementById("host")!;
});

const settle = () => new Promise((resolve) => setTimeout(resolve, 0));

describe("app shell", () => {
  it("mounts with the job list and opens on the topic map", async () => {
    mount(root);
    await settle();

    const select = root.querySelector("select.job-select") as HTMLSelectElement;
    expect(select.options).toHaveLength(1);
    expect(select.value).toBe("job-001");
    expect(root.querySelectorAll("nav.tabs button")).toHaveLength(4);
    expect(root.querySelectorAll("g.topic-node")).toHaveLength(5);
    expect(root.querySelector(".banner")?.classList.contains("hidden")).toBe(true);
  });

  it("shows an unreachable banner when the server is down", async () => {
    globalThis.fetch = () => Promise.reject(new TypeError("fetch failed"));
    mount(root);
    await settle();

    const banner = root.querySelector(".banner")!;
    expect(banner.classList.contains("hidden")).toBe(false);
    expect(banner.textContent).toBe("server unreachable");
  });

  it("switches panes through the tabs", async () => {
    const app = mount(root);
    await settle();

    await app.show("documents");
    expect(root.querySelector(".doc-table")).not.toBeNull();

    await app.show("review");
    expect(root.querySelectorAll(".review-card").length).toBeGreaterThan(0);

    await app.show("graph");
    expect(root.querySelector(".kg-stats")).not.toBeNull();
  });

  it("runs pipeline stages from the toolbar", async () => {
    mount(root);
    await settle();

    const buttons = [...root.querySelectorAll("button.stage-btn")];
    expect(buttons.map((b) => b.textContent)).toContain("network built");
    const networkBtn = buttons.find(
      (b) => b.textContent === "network built",
    ) as HTMLButtonElement;
    networkBtn.click();
    await settle();
    expect(server.requests).toContain(
      "POST /jobs/job-001/stages/network_built",
    );
  });

  it("surfaces server detail messages for unready stages in the pane", async () => {
    server.kg = { nodes: [], edges: [] };
    const app = mount(root);
    await settle();
    // a 4xx from a pane load renders as an in-pane notice, not a crash
    server.fetchOverride = (path) =>
      path === "/kg" ? [409, { detail: "stage 'validated' not reached" }] : null;
    await app.show("graph");
    expect(root.querySelector(".pane:not(.hidden) .empty-state")?.textContent).toContain(
      "not reached",
    );
  });
});
