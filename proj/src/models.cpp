#include "evolve/devices.hpp"

namespace evolve::devices {

using statechart::TimeoutSpec;
using statechart::Transition;

StateMachine light_bulb_original() {
    return StateMachine("lightbulb", "off", {"switch"}, {"off", "on"},
                        {{"off", "switch", "on"}, {"on", "switch", "off"}}, {});
}

StateMachine light_bulb_evolved() {
    return StateMachine("lightbulb_evolved", "off", {"switch", "timeout"},
                        {"incandescentOn", "off", "on", "wait"},
                        {
                            {"incandescentOn", "switch", "off"},
                            {"off", "switch", "on"},
                            {"on", "switch", "wait"},
                            {"wait", "switch", "incandescentOn"},
                            {"wait", "timeout", "off"},
                        },
                        {TimeoutSpec{"wait", 2000, "timeout"}});
}

StateMachine cleaning_robot_original() {
    return StateMachine("robot", "off", {"clean", "endSpot", "spot"},
                        {"clean", "off", "on", "spot"},
                        {
                            {"clean", "clean", "on"},
                            {"off", "clean", "on"},
                            {"on", "clean", "clean"},
                            {"on", "spot", "spot"},
                            {"spot", "endSpot", "on"},
                        },
                        {});
}

StateMachine cleaning_robot_evolved(std::int64_t spot_wait_timeout_ms) {
    return StateMachine("robot_evolved", "off",
                        {"arriveSpot", "clean", "endSpot", "spot", "timeout"},
                        {"clean", "move", "off", "on", "spot", "spotWait"},
                        {
                            {"clean", "clean", "spotWait"},
                            {"move", "arriveSpot", "spot"},
                            {"off", "clean", "on"},
                            {"on", "clean", "clean"},
                            {"on", "spot", "move"},
                            {"spot", "endSpot", "on"},
                            {"spotWait", "clean", "spot"},
                            {"spotWait", "timeout", "on"},
                        },
                        {TimeoutSpec{"spotWait", spot_wait_timeout_ms, "timeout"}});
}

}  // namespace evolve::devices
