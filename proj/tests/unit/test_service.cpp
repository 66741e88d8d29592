#include <doctest.h>

#include <nlohmann/json.hpp>
#include <thread>

#include "emo/classifier/model.hpp"
#include "emo/core/error.hpp"
#include "emo/core/io.hpp"
#include "emo/datagen/synthetic.hpp"
#include "emo/face/preprocess.hpp"
#include "emo/gan/trainer.hpp"
#include "emo/service/blog.hpp"
#include "emo/service/config.hpp"
#include "emo/service/http.hpp"
#include "emo/service/pipeline.hpp"
#include "test_support.hpp"

// Last: resolv.h (via httplib) defines a `_res` macro that breaks Eigen.
#include <httplib.h>

using namespace emo;
using namespace emo::service;
namespace fs = std::filesystem;

namespace {

std::shared_ptr<const Models> shared_models() {
  static const std::shared_ptr<const Models> models = [] {
    auto m = std::make_shared<Models>();
    const auto items = datagen::synthetic_corpus(7, 20);
    const text::EmbeddingStore store = text::parse_vectors(datagen::synthetic_vectors(7, 16));
    classifier::TrainConfig cfg;
    cfg.hidden_dim = 8;
    cfg.epochs = 3;
    m->classifier = std::make_shared<classifier::ClassifierModel>(
        classifier::train(classifier::stratified_split(items, 0.8, 7), store, cfg));
    gan::GanConfig g = gan::reduced_config();
    g.model.generator = {4, 1};
    g.model.discriminator = {4, 2, 0.01};
    m->gan = std::make_shared<gan::GanState>(gan::init_state(g));
    m->cascade = std::make_shared<face::CascadeModel>(test::cascade());
    return m;
  }();
  return models;
}

std::vector<std::uint8_t> photo_bytes(int i = 0) {
  char name[32];
  std::snprintf(name, sizeof name, "face_%02d.png", i);
  return read_file(test::data_dir() / "faces_mini" / name);
}

std::vector<std::uint8_t> blank_bytes() { return encode_png(Image(120, 120, 3, 180)); }

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::IoError;
}

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("create_user examples") {
    const test::TempDir tmp;
    BlogService blog(tmp.path(), shared_models());
    const UserRecord a = blog.create_user("alice");
    CHECK(a.name == "alice");
    CHECK_FALSE(a.original_photo);
    CHECK_FALSE(a.prepped_face);
    CHECK_FALSE(a.current_avatar);
    CHECK(code_of([&] { blog.create_user(""); }) == Errc::EmptyName);
    CHECK(blog.create_user("bob").id != a.id);
  }

  TEST_CASE("set_photo paths") {
    const test::TempDir tmp;
    BlogService blog(tmp.path(), shared_models());
    const UserRecord u = blog.create_user("carol");

    CHECK(code_of([&] { blog.set_photo("nobody", photo_bytes()); }) == Errc::UnknownUser);

    const std::vector<std::uint8_t> junk{1, 2, 3, 4, 5};
    CHECK(code_of([&] { blog.set_photo(u.id, junk); }) == Errc::UndecodableImage);
    CHECK(blog.get_profile(u.id) == u);

    CHECK(code_of([&] { blog.set_photo(u.id, blank_bytes()); }) == Errc::NoFaceDetected);
    const UserRecord after_blank = blog.get_profile(u.id);
    CHECK(after_blank.original_photo.has_value());
    CHECK_FALSE(after_blank.prepped_face);
    CHECK(blog.content().contains(*after_blank.original_photo));

    const UserRecord ok = blog.set_photo(u.id, photo_bytes(1));
    REQUIRE(ok.prepped_face);
    CHECK(ok.current_avatar == ok.prepped_face);
    const Image prepped = blog.content().get_image(*ok.prepped_face);
    CHECK(prepped.width == 128);
    CHECK(prepped.height == 128);
    CHECK(prepped.channels == 3);
    CHECK(blog.check_consistency().ok());
  }

  TEST_CASE("create_post flow") {
    const test::TempDir tmp;
    BlogService blog(tmp.path(), shared_models());
    const UserRecord u = blog.create_user("dana");
    CHECK(code_of([&] { blog.create_post(u.id, "hello"); }) == Errc::NoPhotoOnProfile);
    CHECK(code_of([&] { blog.create_post("ghost", "hello"); }) == Errc::UnknownUser);
    CHECK(code_of([&] { blog.get_profile("ghost"); }) == Errc::UnknownUser);

    const UserRecord withp = blog.set_photo(u.id, photo_bytes(2));
    const auto [p1, u1] = blog.create_post(u.id, "I'm not feeling well today");
    Eigen::VectorXd probs = Eigen::Map<const Eigen::VectorXd>(p1.probabilities.data(), 7);
    CHECK(code(p1.emotion) == classifier::argmax(probs));
    CHECK(p1.domain == blog.models().emotion_map.map(p1.emotion));
    CHECK(u1.current_avatar == p1.avatar);
    CHECK(blog.get_profile(u.id).current_avatar == p1.avatar);
    CHECK(u1.current_emotion == p1.emotion);

    // Always from the stored prepped face: a fresh synthesis matches the avatar.
    const Image prepped = blog.content().get_image(*withp.prepped_face);
    const TransferResult direct = transfer_emotion_prepped("I'm not feeling well today", prepped, blog.models());
    CHECK(blog.content().get_image(p1.avatar) == direct.face);

    const auto [p2, u2] = blog.create_post(u.id, "I'm not feeling well today");
    CHECK(p2.avatar == p1.avatar);
    const auto posts = blog.list_posts(u.id);
    REQUIRE(posts.size() == 2);
    CHECK(posts[0].id == p2.id);
    CHECK(posts[0].created_at > posts[1].created_at);
    CHECK(blog.check_consistency().ok());

    BlogService reopened(tmp.path(), shared_models());
    CHECK(reopened.list_posts(u.id) == posts);
    CHECK(reopened.get_profile(u.id) == blog.get_profile(u.id));
  }

  TEST_CASE("missing models") {
    const test::TempDir tmp;
    BlogService blog(tmp.path(), std::make_shared<Models>());
    const UserRecord u = blog.create_user("erin");
    CHECK(code_of([&] { blog.set_photo(u.id, photo_bytes()); }) == Errc::ModelNotLoaded);
    CHECK(code_of([&] { transfer_emotion("hi", Image(10, 10, 3), Models{}); }) == Errc::ModelNotLoaded);
  }

  TEST_CASE("transfer_emotion errors and determinism") {
    const Models& m = *shared_models();
    CHECK(code_of([&] { transfer_emotion("hi", Image(100, 100, 3, 50), m); }) == Errc::NoFaceDetected);
    const Image photo = read_image(test::data_dir() / "faces_mini" / "face_04.png");
    const TransferResult a = transfer_emotion("so happy today", photo, m);
    const TransferResult b = transfer_emotion("so happy today", photo, m);
    CHECK(encode_png(a.face) == encode_png(b.face));
    CHECK(a.probabilities == b.probabilities);
  }

  TEST_CASE("concurrent posts for one user serialize") {
    const test::TempDir tmp;
    BlogService blog(tmp.path(), shared_models());
    const UserRecord u = blog.create_user("finn");
    blog.set_photo(u.id, photo_bytes(3));
    std::vector<std::thread> threads;
    for (int i = 0; i < 4; ++i)
      threads.emplace_back([&, i] { blog.create_post(u.id, i % 2 ? "angry and furious" : "so happy today"); });
    for (auto& t : threads) t.join();
    const auto posts = blog.list_posts(u.id);
    CHECK(posts.size() == 4);
    CHECK(blog.get_profile(u.id).current_avatar == posts.front().avatar);
    CHECK(blog.check_consistency().ok());
  }

  TEST_CASE("store json round trip") {
    StoreSnapshot s;
    s.users["u1"] = UserRecord{"u1", "gus", "a", "b", "c", EmotionLabel::Fear};
    PostRecord p;
    p.id = "p1";
    p.user_id = "u1";
    p.text = "x";
    p.probabilities = {0.1, 0.2, 0.3, 0.1, 0.1, 0.1, 0.1};
    p.emotion = EmotionLabel::Anger;
    p.avatar = "c";
    p.created_at = 5;
    s.posts.push_back(p);
    const StoreSnapshot back = store_from_json(store_to_json(s));
    CHECK(back.users == s.users);
    CHECK(back.posts == s.posts);
  }

  TEST_CASE("config file with environment overrides") {
    const std::string toml = R"(
[models]
classifier = "clf.json"
gan = "gan.ckpt"
[store]
root = "/tmp/s"
[server]
port = 9000
[pipeline]
confidence_threshold = 0.4
)";
    const auto none = [](std::string_view) -> std::optional<std::string> { return std::nullopt; };
    const ServiceConfig a = parse_service_config(toml, none);
    CHECK(a.classifier_model == "clf.json");
    CHECK(a.port == 9000);
    CHECK(a.confidence_threshold == 0.4);
    const auto env = [](std::string_view k) -> std::optional<std::string> {
      if (k == "EMO_PORT") return "9100";
      if (k == "EMO_STORE_ROOT") return "/tmp/other";
      return std::nullopt;
    };
    const ServiceConfig b = parse_service_config(toml, env);
    CHECK(b.port == 9100);
    CHECK(b.store_root == "/tmp/other");
    CHECK_THROWS_AS(parse_service_config("[server]\nport = \"x\"\n", none), Error);
    const auto bad = [](std::string_view k) -> std::optional<std::string> {
      if (k == "EMO_PORT") return "abc";
      return std::nullopt;
    };
    CHECK_THROWS_AS(parse_service_config(toml, bad), Error);
  }

  TEST_CASE("error codes map to http statuses") {
    CHECK(http_error_for(Errc::NoFaceDetected).status == 422);
    CHECK(http_error_for(Errc::NoFaceDetected).code == "no_face");
    CHECK(http_error_for(Errc::UndecodableImage).status == 400);
    CHECK(http_error_for(Errc::NoPhotoOnProfile).status == 409);
    CHECK(http_error_for(Errc::UnknownUser).status == 404);
  }

  TEST_CASE("http api end to end") {
    const test::TempDir tmp;
    BlogService blog(tmp.path(), shared_models());
    ApiServer server(blog, 10 * 1024 * 1024);
    const int port = server.bind_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client cli("127.0.0.1", port);
    using nlohmann::json;

    auto r = cli.Post("/api/users", R"({"name":"hana"})", "application/json");
    REQUIRE(r);
    CHECK(r->status == 201);
    const std::string id = json::parse(r->body)["user"]["id"];

    auto bad = cli.Post("/api/users", R"({"name":""})", "application/json");
    CHECK(bad->status == 400);
    CHECK(json::parse(bad->body)["error"] == "empty_name");

    auto nophoto = cli.Post("/api/users/" + id + "/posts", R"({"text":"hi"})", "application/json");
    CHECK(nophoto->status == 409);

    const auto blank = blank_bytes();
    httplib::MultipartFormDataItems blank_form{{"photo", std::string(blank.begin(), blank.end()), "b.png", "image/png"}};
    CHECK(cli.Put("/api/users/" + id + "/photo", blank_form)->status == 422);
    CHECK(cli.Put("/api/users/" + id + "/photo", "garbage", "application/octet-stream")->status == 400);

    const auto photo = photo_bytes(5);
    httplib::MultipartFormDataItems form{{"photo", std::string(photo.begin(), photo.end()), "p.png", "image/png"}};
    auto up = cli.Put("/api/users/" + id + "/photo", form);
    REQUIRE(up);
    CHECK(up->status == 200);

    auto post = cli.Post("/api/users/" + id + "/posts", R"({"text":"I'm not feeling well today"})", "application/json");
    REQUIRE(post);
    CHECK(post->status == 201);
    const json pj = json::parse(post->body);
    const std::string avatar = pj["user"]["current_avatar"];
    CHECK(avatar == pj["post"]["avatar"]);

    auto img = cli.Get("/api/images/" + avatar);
    REQUIRE(img);
    CHECK(img->status == 200);
    CHECK(img->get_header_value("Cache-Control").find("immutable") != std::string::npos);
    CHECK(decode_image(std::span(reinterpret_cast<const std::uint8_t*>(img->body.data()), img->body.size())).width == 128);

    CHECK(json::parse(cli.Get("/api/users/" + id + "/posts")->body)["posts"].size() == 1);
    CHECK(cli.Get("/api/users/nope")->status == 404);
    CHECK(json::parse(cli.Get("/api/health")->body)["models"]["gan"] == "loaded");

    server.stop();
    t.join();
  }
}
