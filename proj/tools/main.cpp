#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "casad/errors.hpp"
#include "common.hpp"

namespace casadcli {

int dispatch_main(int argc, char** argv) {
  CLI::App app{"casad — payload-level anomaly detection for CAN bus traffic"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  register_simulate(app);
  register_train(app);
  register_detect(app);
  register_tune(app);
  register_report(app);

  try {
    app.parse(argc, argv);
    return kOk;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  } catch (const casad::InvalidConfig& e) {
    log_error(e.what());
    return kUsageError;
  } catch (const casad::NumericalFailure& e) {
    log_error(e.what());
    return kNumericalError;
  } catch (const casad::Error& e) {
    log_error(e.what());
    return kDataError;
  } catch (const std::exception& e) {
    log_error(e.what());
    return kDataError;
  }
}

}  // namespace casadcli

int main(int argc, char** argv) { return casadcli::dispatch_main(argc, argv); }
