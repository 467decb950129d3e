import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    testTimeout: 180_000,
    hookTimeout: 60_000,
    // tfjs variables live on a global engine; parallel files would race
    fileParallelism: false,
  },
});
