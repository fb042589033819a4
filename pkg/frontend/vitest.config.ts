import { defineConfig } from "vitest/config";

export default defineConfig({
  resolve: {
    // Source modules import with ".js" suffixes for browser ES modules;
    // strip the suffix so vitest resolves the TypeScript sources.
    alias: [{ find: /^(\.{1,2}\/.*)\.js$/, replacement: "$1" }],
  },
  test: {
    environment: "node",
    include: ["test/**/*.test.ts"],
  },
});
