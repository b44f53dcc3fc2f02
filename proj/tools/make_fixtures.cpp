// Rebuilds data/fixtures/{describer,coder}.json from the bundled traces.
// Fixture keys are prompt hashes, so rerun this whenever prompt wording changes.

#include "semcast/agents/prompt.hpp"
#include "semcast/uplink/adapters.hpp"
#include "semcast/uplink/sampler.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace semcast;

namespace {

constexpr const char* kValidationDescription =
    "The image depicts a large red building with a flat roof, surrounded by snow-covered trees and a snow-covered "
    "ground. There are two people in the foreground, one of them is holding a camera, and the other appears to be "
    "flying a drone.";

constexpr const char* kValidationScene = R"(```html
<a-scene>
<a-sky color="#DDE6F0"></a-sky>
<a-plane rotation="-90 0 0" width="60" height="60"></a-plane>
<a-box position="0 4 -14" width="16" height="8" depth="8" color="#A52A2A"></a-box>
<a-cone position="-9 1.5 -10" color="#F0F8FF"></a-cone>
<a-cone position="9 1.5 -10" color="#F0F8FF"></a-cone>
<a-cylinder position="-1 0.9 -4" height="1.8" color="#333"></a-cylinder>
<a-cylinder position="1 0.9 -4" height="1.8" color="#1F3A5F"></a-cylinder>
<a-box position="1 2.6 -4" scale="0.5 0.1 0.5" color="#222" animation="property: position; to: 1 3.2 -4; loop: true"></a-box>
</a-scene>
```)";

}  // namespace

int main(int argc, char** argv) {
  const fs::path data = argc > 1 ? fs::path(argv[1]) : fs::path(SEMCAST_DATA_DIR);
  const auto trace = uplink::AnnotationTrace::load(data / "traces" / "video_10.jsonl");
  const auto ticket = uplink::sample_frames(30.0, uplink::kDefaultSamplingPeriod, 1.0, "video-10").front();
  const auto& entry = trace.at(ticket.frame_index);
  const auto packet = uplink::build_annotation_packet(entry.detections, {entry.caption, trace.caption_model()},
                                                      entry.telemetry, ticket);

  const agents::AgentMemory empty;
  const auto fusion = agents::build_fusion_prompt(packet, empty);
  const auto codegen = agents::build_codegen_prompt({kValidationDescription, agents::packet_id(packet), "", Micros{0}});

  fs::create_directories(data / "fixtures");
  std::ofstream(data / "fixtures" / "describer.json")
      << nlohmann::json{{fusion.hash(), kValidationDescription}}.dump(2) << '\n';
  std::ofstream(data / "fixtures" / "coder.json") << nlohmann::json{{codegen.hash(), kValidationScene}}.dump(2)
                                                  << '\n';
  std::cout << "describer " << fusion.hash() << "\ncoder     " << codegen.hash() << '\n';
  return 0;
}
