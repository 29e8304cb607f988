import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api";
import { ServiceStub, pngFile } from "./stub";

describe("ApiClient", () => {
  it("posts the image as a multipart form field named 'image'", async () => {
    const stub = new ServiceStub();
    const client = new ApiClient("", stub.fetch);
    await client.predict(pngFile(), "beans.png", "note");

    const call = stub.calls[0];
    expect(call.url).toBe("/predict");
    expect(call.method).toBe("POST");
    const form = call.body as FormData;
    const file = form.get("image") as File;
    expect(file.name).toBe("beans.png");
    expect(form.get("description")).toBe("note");
  });

  it("accepts a camera-captured JPEG blob", async () => {
    const stub = new ServiceStub();
    const client = new ApiClient("", stub.fetch);
    const record = await client.predict(pngFile("capture.jpg", "image/jpeg"), "capture.jpg");
    expect(record.roast_level).toBe("medium");
  });

  it("surfaces the machine-readable error code on failure", async () => {
    const stub = new ServiceStub();
    stub.failNext = { status: 400, code: "not_an_image" };
    const client = new ApiClient("", stub.fetch);
    const err = await client.predict(pngFile(), "x.png").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(400);
    expect(err.code).toBe("not_an_image");
  });

  it("requests records with the documented paging parameters", async () => {
    const stub = new ServiceStub();
    const client = new ApiClient("", stub.fetch);
    await client.records(20, 40);
    expect(stub.calls[0].url).toBe("/records?limit=20&offset=40");
  });

  it("round-trips a description through PUT", async () => {
    const stub = new ServiceStub();
    const client = new ApiClient("", stub.fetch);
    const record = await client.predict(pngFile(), "x.png");
    const updated = await client.setDescription(record.id, "Doi Chaang batch 7");
    expect(updated.description).toBe("Doi Chaang batch 7");
    const listed = await client.records();
    expect(listed.find((r) => r.id === record.id)?.description).toBe("Doi Chaang batch 7");
    const put = stub.calls.find((c) => c.method === "PUT")!;
    expect(put.url).toBe(`/records/${record.id}/description`);
    expect(String(put.body)).toBe("Doi Chaang batch 7");
  });

  it("prefixes every route with the configured base URL", async () => {
    const stub = new ServiceStub();
    const client = new ApiClient("http://roaster.local:8000", stub.fetch);
    await client.health();
    expect(stub.calls[0].url).toBe("http://roaster.local:8000/health");
  });
});
