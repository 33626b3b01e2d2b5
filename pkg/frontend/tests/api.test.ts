import { describe, expect, it } from "vitest";

import { ApiClient, StaleRevisionError } from "../src/api.js";
import { FakeService } from "./fake_service.js";

describe("ApiClient", () => {
  it("tracks the revision from every GET", async () => {
    const service = new FakeService();
    const client = new ApiClient("http://fake", service.fetch);
    expect(client.revision).toBeNull();
    await client.taxonomy();
    expect(client.revision).toBe("rev-1");
  });

  it("refuses to post before any revision is known", async () => {
    const service = new FakeService();
    const client = new ApiClient("http://fake", service.fetch);
    await expect(client.postDecision("confirm-mapping", {})).rejects.toThrow(/no revision/);
  });

  it("posts the current revision and adopts the new one", async () => {
    const service = new FakeService();
    const client = new ApiClient("http://fake", service.fetch);
    await client.violations();
    const result = await client.postDecision("confirm-mapping", {
      sc_id: "sc-root/has_gills=present/tail_shape=concave",
      concept_id: 2,
    });
    expect(service.posts[0]?.revision).toBe("rev-1");
    expect(client.revision).toBe(result.revision);
  });

  it("maps 409 to StaleRevisionError", async () => {
    const service = new FakeService();
    const client = new ApiClient("http://fake", service.fetch);
    await client.taxonomy();
    service.bumpRevision();
    await expect(
      client.postDecision("confirm-mapping", { sc_id: "x", concept_id: 1 }),
    ).rejects.toBeInstanceOf(StaleRevisionError);
  });

  it("issues no state-changing request other than POST /api/decisions", async () => {
    const service = new FakeService();
    const client = new ApiClient("http://fake", service.fetch);
    await client.taxonomy();
    await client.violations();
    await client.pendingMerges();
    await client.successionCandidates();
    await client.exportDocument();
    const nonGet = service.requests.filter((r) => !r.startsWith("GET "));
    expect(nonGet).toEqual([]);
  });
});
