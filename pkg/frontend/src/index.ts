/** Bundle entry: expose the mount API as a single global. */

import { ServiceClient, ServiceError } from "./api.js";
import { AxlerodWidget, MountConflictError } from "./widget.js";
import { POLICY_NUMBER_RE } from "./types.js";

const api = {
  mount: (config: Parameters<typeof AxlerodWidget.mount>[0]) =>
    AxlerodWidget.mount(config),
  AxlerodWidget,
  MountConflictError,
  ServiceError,
  POLICY_NUMBER_RE,
};

declare global {
  interface Window {
    AxlerodWidget: typeof api;
  }
}

if (typeof window !== "undefined") {
  window.AxlerodWidget = api;
}

export { AxlerodWidget, MountConflictError, ServiceClient, ServiceError };
